#include <gtest/gtest.h>

#include <filesystem>

#include "singtens/singtens.hpp"

using namespace singtens;

namespace {

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "singtens_io_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::string error_of(auto&& f) {
  try {
    f();
  } catch (const IoError& e) {
    return e.what();
  }
  return "<no error>";
}

}  // namespace

TEST(Io, TensorRoundTripIsExact) {
  const CTensor T = random_tensor(Format{2, 3, 4}, 1);
  const CTensor S = tensor_from_json(parse_json_text(tensor_to_json(T).dump()));
  EXPECT_EQ(S.format(), T.format());
  EXPECT_TRUE(std::ranges::equal(S.entries(), T.entries()));
}

TEST(Io, TensorFileRoundTrip) {
  const CTensor T = random_tensor(Format{2, 2}, 2);
  const std::string path = temp_path("tensor.json");
  write_json_file(tensor_to_json(T), path);
  EXPECT_TRUE(std::ranges::equal(read_tensor_file(path).entries(), T.entries()));
}

TEST(Io, SyntaxErrorsReportLineAndColumn) {
  const std::string text = "{\n  \"format\": [2, 2],\n  \"re\": [1, 2,, 3]\n}";
  const std::string msg = error_of([&] { parse_json_text(text, "t.json"); });
  EXPECT_EQ(msg.rfind("t.json:3:", 0), 0u) << msg;
  EXPECT_NE(msg.find("JSON syntax error"), std::string::npos);
}

TEST(Io, SyntaxErrorOnFirstLine) {
  const std::string msg = error_of([] { parse_json_text("[1, 2", "x"); });
  EXPECT_EQ(msg.rfind("x:1:", 0), 0u) << msg;
}

TEST(Io, MissingFieldsAreNamed) {
  EXPECT_NE(error_of([] { tensor_from_json(parse_json_text(R"({"re": [1], "im": [0]})"), "a"); })
                .find("field 'format' is missing"),
            std::string::npos);
  EXPECT_NE(error_of([] { tensor_from_json(parse_json_text(R"({"format": [2, 2], "re": [1, 2, 3, 4]})"), "a"); })
                .find("'im' is missing"),
            std::string::npos);
  EXPECT_NE(error_of([] { tensor_from_json(parse_json_text("[1]"), "a"); }).find("expected a JSON object"),
            std::string::npos);
}

TEST(Io, LengthMismatches) {
  const std::string short_entries = R"({"format": [2, 2], "re": [1, 2, 3], "im": [0, 0, 0]})";
  EXPECT_NE(error_of([&] { tensor_from_json(parse_json_text(short_entries)); }).find("needs 4 entries but 3"),
            std::string::npos);
  const std::string ragged = R"({"format": [2, 2], "re": [1, 2, 3, 4], "im": [0, 0]})";
  EXPECT_NE(error_of([&] { tensor_from_json(parse_json_text(ragged)); }).find("'re' has 4 entries but 'im' has 2"),
            std::string::npos);
}

TEST(Io, BadValues) {
  const std::string text_entry = R"({"format": [2, 2], "re": [1, "x", 3, 4], "im": [0, 0, 0, 0]})";
  EXPECT_NE(error_of([&] { tensor_from_json(parse_json_text(text_entry)); }).find("entry 1 is not a number"),
            std::string::npos);
  const std::string bad_dim = R"({"format": [2, 1], "re": [1, 2], "im": [0, 0]})";
  EXPECT_NE(error_of([&] { tensor_from_json(parse_json_text(bad_dim)); }).find("'format'"), std::string::npos);
  const std::string negative_dim = R"({"format": [2, -3], "re": [], "im": []})";
  EXPECT_NE(error_of([&] { tensor_from_json(parse_json_text(negative_dim)); }).find("not a positive integer"),
            std::string::npos);
  const std::string fractional = R"({"format": [2.5, 2], "re": [], "im": []})";
  EXPECT_NE(error_of([&] { tensor_from_json(parse_json_text(fractional)); }).find("not a positive integer"),
            std::string::npos);
}

TEST(Io, FileErrors) {
  EXPECT_NE(error_of([] { read_json_file("/nonexistent/dir/file.json"); }).find("cannot open file"),
            std::string::npos);
  EXPECT_NE(error_of([] { write_json_file(Json::object(), "/nonexistent/dir/out.json"); }).find("cannot open"),
            std::string::npos);
}

TEST(Io, SolutionsRoundTripIsByteIdentical) {
  const CTensor T = random_tensor(Format{2, 2, 3}, 3);
  const SolutionSet sols = solve_singular_tuples(T, 3);
  const std::string first = solutions_to_json(sols).dump(2);
  const SolutionSet back = solutions_from_json(parse_json_text(first));
  EXPECT_EQ(solutions_to_json(back).dump(2), first);
  ASSERT_EQ(back.size(), sols.size());
  for (std::size_t i = 0; i < sols.size(); ++i) {
    EXPECT_EQ(back.tuples[i].x, sols.tuples[i].x);
    EXPECT_TRUE(std::ranges::equal(back.tuples[i].rank_one.entries(), sols.tuples[i].rank_one.entries()));
  }
  const std::string path = temp_path("sols.json");
  write_json_file(solutions_to_json(sols), path);
  EXPECT_EQ(read_solutions_file(path).size(), sols.size());
}

TEST(Io, SolutionsValidation) {
  Json j = solutions_to_json(solve_singular_tuples(random_tensor(Format{2, 2}, 4), 4));
  Json wrong_x = j;
  wrong_x["tuples"][0]["x"].erase(1);
  EXPECT_NE(error_of([&] { solutions_from_json(wrong_x, "s"); }).find("tuples[0].x"), std::string::npos);
  Json short_vec = j;
  short_vec["tuples"][1]["x"][0]["re"] = Json::array({1.0});
  short_vec["tuples"][1]["x"][0]["im"] = Json::array({0.0});
  EXPECT_NE(error_of([&] { solutions_from_json(short_vec, "s"); }).find("has length 1, expected 2"),
            std::string::npos);
  Json bad_type = j;
  bad_type["complete"] = "yes";
  EXPECT_NE(error_of([&] { solutions_from_json(bad_type, "s"); }).find("wrong field type"), std::string::npos);
  Json bad_residual = j;
  bad_residual["tuples"][0]["residual"] = "small";
  EXPECT_NE(error_of([&] { solutions_from_json(bad_residual, "s"); }).find("residual"), std::string::npos);
  Json no_tuples = j;
  no_tuples.erase("tuples");
  EXPECT_NE(error_of([&] { solutions_from_json(no_tuples, "s"); }).find("'tuples' is missing"), std::string::npos);
}

TEST(Io, SpanReportNullsUnknownValues) {
  SpanReport r;
  r.format = Format{3, 3, 3, 8};
  r.gap_ratio = std::numeric_limits<double>::infinity();
  const Json j = span_report_to_json(r);
  EXPECT_TRUE(j["gap_ratio"].is_null());
  EXPECT_TRUE(j["expected_span_dim"].is_null());
  r.expected = SpanExpectation{13, SpanBasis::symbolically_resolved};
  r.gap_ratio = 2e9;
  const Json k = span_report_to_json(r);
  EXPECT_EQ(k["expected_span_dim"], 13);
  EXPECT_EQ(k["expected_basis"], "symbolically resolved");
  EXPECT_EQ(k["gap_ratio"], 2e9);
}

TEST(Io, RelationSummaryLayout) {
  const Format f{2, 2, 4};
  PrefixSymmetry s = PrefixSymmetry::identity(f);
  s.coord_perm[0] = {1, 0};
  RelationSummary sum;
  sum.format = f;
  sum.search.index_sets = 6;
  sum.search.validated.push_back({IndexSetChoice{{2, 3}}, s, {CTensor(f), "lbl"}, 1e-16});
  const Json j = relations_to_json(sum);
  EXPECT_EQ(j["relations"][0]["index_set"], Json::parse("[[2,1],[2,2]]"));
  EXPECT_EQ(j["relations"][0]["symmetry"]["coordinate_maps"], Json::parse("[[2,1],[1,2]]"));
  EXPECT_TRUE(j["relations"][0].contains("coefficients"));
  EXPECT_TRUE(j["stable_across_seeds"].is_null());
  EXPECT_TRUE(j["min_rejected_residual"].is_null());
  sum.stable_count = 1;
  const Json k = relations_to_json(sum, false);
  EXPECT_FALSE(k["relations"][0].contains("coefficients"));
  EXPECT_EQ(k["stable_across_seeds"], 1);
}
