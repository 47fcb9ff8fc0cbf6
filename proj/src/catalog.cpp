#include <algorithm>
#include <charconv>
#include <stdexcept>

#include <json.hpp>

#include "msi/error.hpp"
#include "msi/indices.hpp"

namespace msi {

namespace {

using R = SpectralRole;
using G = IndexGroup;
using F = Formula;

std::vector<SpectralRole> canonical(std::initializer_list<SpectralRole> roles) {
  std::vector<SpectralRole> out(roles);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw FormatError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::string_view to_string(IndexGroup group) noexcept {
  static constexpr std::array<std::string_view, 13> names = {
      "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X", "XI", "XII", "SUPPLEMENTARY"};
  return names[static_cast<std::size_t>(group)];
}

std::string_view to_string(AsiComponent c) noexcept {
  static constexpr std::array<std::string_view, 4> names = {"AF", "VSF", "SSF", "MF"};
  return names[static_cast<std::size_t>(c)];
}

double IndexSpec::param(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) {
      return p.value;
    }
  }
  throw std::out_of_range(id + " has no parameter '" + std::string(name) + "'");
}

bool IndexSpec::has_param(std::string_view name) const noexcept {
  return std::any_of(params.begin(), params.end(),
                     [&](const IndexParam& p) { return p.name == name; });
}

void IndexSpec::set_param(std::string_view name, double value) {
  for (auto& p : params) {
    if (p.name == name) {
      p.value = value;
      return;
    }
  }
  throw std::out_of_range(id + " has no parameter '" + std::string(name) + "'");
}

IndexCatalog IndexCatalog::standard(RoleAliases aliases) {
  const R S = aliases.swir;
  const R SL = aliases.swir_long;

  IndexCatalog cat;
  auto add = [&](std::string id, G group, F formula, std::vector<SpectralRole> roles,
                 bool ctx = false, std::vector<IndexParam> params = {}) {
    cat.entries_.push_back(
        IndexSpec{std::move(id), group, formula, std::move(roles), ctx, std::move(params), aliases});
  };

  const auto nir_red = canonical({R::Nir, R::Red});
  const auto nd_hd = canonical({R::Nir, R::Red, R::Hotspot, R::Darkspot});
  const auto mbi_mndwi = canonical({R::Swir1, R::Swir2, R::Nir, R::Green, SL});
  const auto asi_roles = canonical({R::Blue, R::Green, R::Red, R::Nir, R::Swir1, R::Swir2, SL});

  add("SR", G::I, F::SR, nir_red);
  add("NDVI", G::I, F::NDVI, nir_red);
  add("DVI", G::I, F::DVI, nir_red);
  add("RDVI", G::I, F::RDVI, nir_red);
  add("MSR", G::I, F::MSR, nir_red);
  add("GNDVI", G::I, F::GNDVI, canonical({R::Nir, R::Green}));
  add("GARI", G::I, F::GARI, canonical({R::Nir, R::Green, R::Blue, R::Red}), false,
      {{"gamma", 1.0}});
  add("NDRE", G::I, F::NDRE, canonical({R::Nir, R::RedEdge}));
  add("GDVI", G::I, F::GDVI, canonical({R::Nir, R::Green}));
  add("GRVI", G::I, F::GRVI, canonical({R::Nir, R::Green}));
  add("IDVI", G::I, F::IDVI, nir_red);

  add("ARI", G::II, F::ARI, canonical({R::Green, R::RedEdge}));
  add("MARI", G::II, F::MARI, canonical({R::Green, R::RedEdge, R::Red}));

  add("EVI", G::III, F::EVI, canonical({R::Nir, R::Red, R::Blue}));
  add("EVI2", G::III, F::EVI2, nir_red);

  add("SAVI", G::IV, F::SAVI, nir_red, false, {{"soil_factor", 0.5}});
  add("MSAVI", G::IV, F::MSAVI, nir_red);
  add("OSAVI", G::IV, F::OSAVI, nir_red);

  add("MBI", G::V, F::MBI, canonical({R::Swir1, R::Swir2, R::Nir}));
  add("EMBI", G::V, F::EMBI, mbi_mndwi);

  add("TAVI", G::VI, F::TAVI, nir_red, true, {{"f_delta", 2.28}});

  add("NDHD", G::VII, F::NDHD, canonical({R::Hotspot, R::Darkspot}));
  add("NHVI2", G::VII, F::NHVI2, nd_hd);
  add("HSVI", G::VII, F::HSVI, nd_hd, false, {{"soil_factor", 0.5}});
  add("HEVI2", G::VII, F::HEVI2, nd_hd);

  // Coefficient-only index: its inputs are the UPDM grids in the context.
  add("VIUPD", G::VIII, F::VIUPD, {}, true);

  add("NDWI", G::IX, F::NDWI, canonical({R::Green, R::Nir}));
  add("NDMI", G::IX, F::NDMI, canonical({R::Nir, S}));
  add("MNDWI", G::IX, F::MNDWI, canonical({R::Green, SL}));

  add("NBR", G::X, F::NBR, canonical({R::Nir, S}));
  add("BAI", G::X, F::BAI, nir_red, false, {{"red_ref", 0.12}, {"nir_ref", 0.06}});
  add("NBRT1", G::X, F::NBRT1, canonical({R::Nir, S, R::Thermal}), false,
      {{"thermal_scale", 1000.0}});

  add("ASI", G::XI, F::ASI, asi_roles, true);
  add("ASI_ALT", G::XI, F::ASI_ALT, asi_roles);
  add("AF", G::XI, F::AF, canonical({R::Nir, R::Blue}));
  add("VSF", G::XI, F::VSF, nir_red);
  add("SSF", G::XI, F::SSF, mbi_mndwi);
  add("MF", G::XI, F::MF, canonical({R::Blue, R::Green, R::Nir, R::Swir1}));

  add("REI", G::XII, F::REI, canonical({R::Nir, R::Blue}));
  add("RI", G::XII, F::RI, canonical({S, R::Nir, R::Blue}));

  add("UI", G::Supplementary, F::UI, canonical({R::Swir2, R::Nir}));
  add("NDBI", G::Supplementary, F::NDBI, canonical({R::Swir1, R::Nir}));
  add("IBI", G::Supplementary, F::IBI, canonical({R::Swir1, R::Nir, R::Red, R::Green, SL}),
      false, {{"soil_factor", 0.5}});
  add("BCI", G::Supplementary, F::BCI, canonical({R::TcH, R::TcV, R::TcL}));
  add("VGNIR_BI", G::Supplementary, F::VGNIR_BI, canonical({R::Green, R::Nir}));
  add("PISI", G::Supplementary, F::PISI, canonical({R::Blue, R::Nir}));
  add("BLFEI", G::Supplementary, F::BLFEI,
      canonical({R::Green, R::Red, R::Swir2, R::Swir1}));
  add("MUWI", G::Supplementary, F::MUWI,
      canonical({R::Blue, R::Green, R::Red, R::Nir, R::Swir1, R::Swir2}), true);
  return cat;
}

const IndexSpec* IndexCatalog::find(std::string_view id) const noexcept {
  for (const auto& e : entries_) {
    if (e.id == id) {
      return &e;
    }
  }
  return nullptr;
}

const IndexSpec& IndexCatalog::at(std::string_view id) const {
  if (const auto* e = find(id)) {
    return *e;
  }
  throw Error("unknown index '" + std::string(id) + "'");
}

void IndexCatalog::set_param(std::string_view id, std::string_view name, double value) {
  for (auto& e : entries_) {
    if (e.id == id) {
      e.set_param(name, value);
      return;
    }
  }
  throw Error("unknown index '" + std::string(id) + "'");
}

std::size_t IndexCatalog::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw FormatError("parameter override must look like name=value");
  }
  const std::string_view key = assignment.substr(0, eq);
  const double value = parse_double(assignment.substr(eq + 1));
  if (const auto dot = key.find('.'); dot != std::string_view::npos) {
    try {
      set_param(key.substr(0, dot), key.substr(dot + 1), value);
    } catch (const std::out_of_range& e) {
      throw FormatError(e.what());
    }
    return 1;
  }
  std::size_t changed = 0;
  for (auto& e : entries_) {
    if (e.has_param(key)) {
      e.set_param(key, value);
      ++changed;
    }
  }
  if (changed == 0) {
    throw FormatError("no index has a parameter named '" + std::string(key) + "'");
  }
  return changed;
}

std::vector<SpectralRole> required_bands(const IndexSpec& spec) { return spec.required_roles; }

UpdmGrids updm_from_grids(const GridSet& grids, const GridMeta& expected) {
  if (!grids.meta.same_shape(expected)) {
    throw DimensionError("UPDM coefficient grids do not match the stack dimensions");
  }
  auto take = [&](std::initializer_list<std::string_view> names) {
    for (auto n : names) {
      if (const auto* g = grids.find(n)) {
        return g->data;
      }
    }
    throw ContextError("UPDM grids lack layer " + std::string(*names.begin()));
  };
  return UpdmGrids{take({"C_V"}), take({"C_S"}), take({"C_W"}), take({"C_4", "C_Y"})};
}

MuwiCoefficients parse_muwi(std::string_view json_text) {
  static const std::vector<SpectralRole> allowed = {R::Blue, R::Green, R::Red,
                                                    R::Nir,  R::Swir1, R::Swir2};
  MuwiCoefficients c;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    for (const auto& [name, value] : doc.at("weights").items()) {
      const SpectralRole role = parse_role(name);
      if (std::find(allowed.begin(), allowed.end(), role) == allowed.end()) {
        throw RoleError("MuWi weights may only name BLUE, GREEN, RED, NIR, SWIR1, SWIR2");
      }
      c.weights.emplace_back(role, value.get<double>());
    }
    c.offset = doc.at("offset").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed MuWi coefficients: ") + e.what());
  }
  return c;
}

}  // namespace msi
