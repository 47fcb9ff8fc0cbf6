#include <doctest.h>

#include <sstream>

#include "msi/error.hpp"
#include "msi/lai.hpp"
#include "support.hpp"

using namespace msi;
using R = SpectralRole;

namespace {

LaiInputs input_for(const LaiModelSpec& m, double x, double idvi = 1.0) {
  LaiInputs in;
  const auto base = m.base_index();
  if (base == "NDVI") in.ndvi = x;
  if (base == "EVI2") in.evi2 = x;
  if (base == "SAVI") in.savi = x;
  if (m.kind == LaiKind::Blend) in.idvi = idvi;
  return in;
}

double estimate(std::string_view id, double x) {
  const auto m = lai_model(id);
  return lai_estimate(m, input_for(m, x));
}

struct OracleRow {
  std::string formula;
  double x, idvi, k, expected;
};

std::vector<OracleRow> load_lai_oracle() {
  std::istringstream in(msi::test::slurp(msi::test::data_dir() / "lai_oracle.csv"));
  std::string line;
  std::getline(in, line);
  std::vector<OracleRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    OracleRow r;
    std::string f;
    std::getline(ls, r.formula, ',');
    std::getline(ls, f, ',');
    r.x = std::stod(f);
    std::getline(ls, f, ',');
    r.idvi = std::stod(f);
    std::getline(ls, f, ',');
    r.k = std::stod(f);
    std::getline(ls, f, ',');
    r.expected = std::stod(f);
    rows.push_back(r);
  }
  return rows;
}

BandStack nir_red_stack(std::size_t w, std::size_t h, std::vector<float> nir,
                        std::vector<float> red) {
  GridMeta m;
  m.width = w;
  m.height = h;
  return BandStack(m, {{R::Red, "r", std::move(red)}, {R::Nir, "n", std::move(nir)}});
}

}  // namespace

TEST_CASE("model catalog") {
  const auto models = lai_models();
  CHECK(models.size() == 10);
  for (const char* id : {"cubic-ndvi", "linear-ndvi", "exp-ndvi", "evi2-a", "evi2-b", "evi2-c",
                         "evi2-d", "savi-a", "savi-b", "blend"}) {
    CHECK_NOTHROW(lai_model(id));
  }
  CHECK_THROWS_AS(lai_model("lai-x"), Error);
  CHECK(lai_model("evi2-c").base_index() == "EVI2");
  CHECK(lai_model("savi-b").base_index() == "SAVI");
  CHECK(lai_model("blend").base_index() == "NDVI");
  CHECK(lai_model("blend").k == 16.0);
}

TEST_CASE("worked examples") {
  CHECK(estimate("cubic-ndvi", 0.0) == doctest::Approx(-0.257).epsilon(1e-12));
  CHECK(estimate("linear-ndvi", 0.3) == doctest::Approx(1.01).epsilon(1e-12));
  CHECK(estimate("savi-a", 0.0) == 0.0);
  for (double k : {12.0, 14.5, 16.0, 20.0}) {
    CHECK(blend_alpha(0.8, k) == 0.5);
  }
}

TEST_CASE("domain violations") {
  CHECK_THROWS_AS(estimate("savi-b", 0.69), DomainError);
  CHECK_THROWS_AS(estimate("savi-b", 0.9), DomainError);
  CHECK_THROWS_AS(estimate("evi2-a", -0.01), DomainError);
  CHECK_THROWS_AS(estimate("evi2-c", 0.05), DomainError);
  CHECK_THROWS_AS(estimate("evi2-d", 0.01), DomainError);
  CHECK_THROWS_AS(lai_estimate(lai_model("cubic-ndvi"), LaiInputs{}), ContextError);
  LaiInputs no_idvi;
  no_idvi.ndvi = 0.5;
  CHECK_THROWS_AS(lai_estimate(lai_model("blend"), no_idvi), ContextError);
}

TEST_CASE("blend parameters") {
  LaiModelSpec m = lai_model("blend");
  apply_lai_override(m, "k=14");
  CHECK(m.k == 14.0);
  apply_lai_override(m, "idvi_a=2.5");
  apply_lai_override(m, "idvi_b=-0.5");
  apply_lai_override(m, "ndvi_model=linear-ndvi");
  CHECK(m.ndvi_model == LaiKind::LinearNdvi);
  LaiInputs in;
  in.ndvi = 0.7;
  in.idvi = 1.2;
  const double a = blend_alpha(0.7, 14.0);
  CHECK(lai_estimate(m, in) ==
        doctest::Approx((1 - a) * (4.9 * 0.7 - 0.46) + a * (2.5 * 1.2 - 0.5)).epsilon(1e-12));

  LaiModelSpec bad = lai_model("blend");
  bad.k = 11.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad.k = 21.0;
  CHECK_THROWS_AS(lai_estimate(bad, in), DomainError);
  LaiModelSpec evi_sub = lai_model("blend");
  CHECK_THROWS_AS(apply_lai_override(evi_sub, "ndvi_model=evi2-a"), DomainError);
  CHECK_THROWS(apply_lai_override(evi_sub, "q=1"));
}

TEST_CASE("scripted oracle, 11 formulas x 1000 inputs") {
  const auto rows = load_lai_oracle();
  REQUIRE(rows.size() == 11000);
  std::map<std::string, int> seen;
  for (const auto& r : rows) {
    double got;
    if (r.formula == "alpha") {
      got = blend_alpha(r.x, r.k);
    } else {
      LaiModelSpec m = lai_model(r.formula);
      m.k = r.k;
      got = lai_estimate(m, input_for(m, r.x, r.idvi));
    }
    ++seen[r.formula];
    CHECK_MESSAGE(msi::test::close_rel(got, r.expected, 1e-9, 1e-12), r.formula << " x=" << r.x);
  }
  CHECK(seen.size() == 11);
}

TEST_CASE("blend is bounded by its sub-models and alpha is increasing") {
  SplitMix64 rng(10);
  const LaiModelSpec m = lai_model("blend");
  for (int i = 0; i < 5000; ++i) {
    LaiInputs in;
    in.ndvi = -1.0 + 2.0 * rng.uniform();
    in.idvi = 0.2 + 3.0 * rng.uniform();
    const double v = lai_estimate(m, in);
    const double n = *in.ndvi;
    const double lai_ndvi = 9.519 * n * n * n - 0.1204 * n * n + 1.236 * n - 0.257;
    const double lai_idvi = *in.idvi;
    CHECK(v >= std::min(lai_ndvi, lai_idvi) - 1e-12);
    CHECK(v <= std::max(lai_ndvi, lai_idvi) + 1e-12);
  }
  for (double k : {12.0, 16.0, 20.0}) {
    double prev = blend_alpha(-1.0, k);
    for (int i = 1; i <= 200; ++i) {
      const double a = blend_alpha(-1.0 + 0.01 * i, k);
      REQUIRE(a > prev);
      prev = a;
    }
  }
}

TEST_CASE("lai_map") {
  const IndexCatalog cat = IndexCatalog::standard();
  SUBCASE("constant scene gives the scalar output") {
    const BandStack s = nir_red_stack(3, 2, std::vector<float>(6, 0.6f), std::vector<float>(6, 0.1f));
    const IndexMap map = lai_map(lai_model("cubic-ndvi"), s, cat);
    const double ndvi = compute_pixel(cat.at("NDVI"),
                                      PixelSample().set(R::Nir, 0.6f).set(R::Red, 0.1f), {});
    LaiInputs in;
    in.ndvi = static_cast<float>(ndvi);
    const float expected = static_cast<float>(lai_estimate(lai_model("cubic-ndvi"), in));
    for (float v : map.data) CHECK(v == expected);
    CHECK(map.index_id == "LAI:cubic-ndvi");
  }
  SUBCASE("blend is the pixelwise composition") {
    const BandStack s = msi::test::random_stack(30, 20, 77, {R::Red, R::Nir});
    const LaiModelSpec m = lai_model("blend");
    const IndexMap lai = lai_map(m, s, cat);
    const IndexMap ndvi = compute_map(cat.at("NDVI"), s, {});
    const IndexMap idvi = compute_map(cat.at("IDVI"), s, {});
    for (std::size_t p = 0; p < lai.data.size(); ++p) {
      const double n = ndvi.data[p], d = idvi.data[p];
      const double a = 1.0 / (1.0 + std::exp(-16.0 * (n - 0.8)));
      const double cubic = 9.519 * n * n * n - 0.1204 * n * n + 1.236 * n - 0.257;
      const double expected = (1.0 - a) * cubic + a * d;
      CHECK(lai.data[p] == doctest::Approx(expected).epsilon(1e-6));
    }
  }
  SUBCASE("log-SAVI outside its domain becomes nodata") {
    const BandStack s = nir_red_stack(2, 1, {1.0f, 0.3f}, {0.0f, 0.2f});
    const IndexMap map = lai_map(lai_model("savi-b"), s, cat);
    CHECK(is_nodata(map.data[0]));
    CHECK_FALSE(is_nodata(map.data[1]));
    CHECK(map.singular_count == 1);
  }
  SUBCASE("missing bands") {
    const BandStack s = msi::test::random_stack(2, 2, 1, {R::Red, R::Green});
    CHECK_THROWS_AS(lai_map(lai_model("exp-ndvi"), s, cat), RoleError);
  }
}
