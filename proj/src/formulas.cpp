// Per-pixel index formulas. Every division and root goes through the
// helpers below so a singular denominator or a negative radicand yields NaN
// instead of an infinity or a domain error.

#include <algorithm>
#include <cmath>
#include <limits>

#include "msi/indices.hpp"

namespace msi::detail {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double div(double num, double den) {
  return std::abs(den) >= kSingularEps ? num / den : kNaN;
}

inline double root(double x) { return x >= 0.0 ? std::sqrt(x) : kNaN; }

inline double nd(double a, double b) { return div(a - b, a + b); }

inline double sqrt_den_div(double num, double radicand) {
  return div(num, root(radicand));
}

struct Bands {
  const std::array<double, kRoleCount>& rho;
  double operator()(SpectralRole r) const { return rho[role_index(r)]; }
};

double ndvi(double n, double r) { return nd(n, r); }

double savi(double n, double r, double soil) {
  return (1.0 + soil) * div(n - r, n + r + soil);
}

double evi2(double n, double r) { return div(2.5 * (n - r), n + 2.4 * r + 1.0); }

double msavi(double n, double r) {
  const double a = 2.0 * n + 1.0;
  return (a - root(a * a - 8.0 * (n - r))) / 2.0;
}

double mbi(double s1, double s2, double n) { return div(s1 - s2 - n, s1 + s2 + n) + 0.5; }

double embi(double mbi_v, double mndwi_v) {
  return div(mbi_v - mndwi_v - 0.5, mbi_v + mndwi_v + 1.5);
}

double af(double n, double b) { return nd(n, b); }
double vsf(double n, double r) { return 1.0 - ndvi(n, r) * msavi(n, r); }
double mf(double b, double g, double n, double s1) { return nd(b + g, n + s1); }

struct AsiParts {
  double af, vsf, ssf, mf;
};

AsiParts asi_parts(const Bands& x, SpectralRole swir_long) {
  const double n = x(SpectralRole::Nir);
  const double r = x(SpectralRole::Red);
  const double g = x(SpectralRole::Green);
  const double b = x(SpectralRole::Blue);
  const double s1 = x(SpectralRole::Swir1);
  const double s2 = x(SpectralRole::Swir2);
  const double mndwi = nd(g, x(swir_long));
  return {af(n, b), vsf(n, r), 1.0 - embi(mbi(s1, s2, n), mndwi), mf(b, g, n, s1)};
}

double phi(double v, const std::optional<MinMax>& mm) {
  return div(v - mm->min, mm->max - mm->min);
}

}  // namespace

double evaluate(const IndexSpec& spec, const std::array<double, kRoleCount>& rho,
                const UpdmSample* updm, const ImageContext& ctx) {
  using R = SpectralRole;
  const Bands x{rho};
  const auto p = [&](std::size_t i) { return spec.params[i].value; };
  const R swir = spec.aliases.swir;
  const R swir_long = spec.aliases.swir_long;

  switch (spec.formula) {
    case Formula::SR:
      return div(x(R::Nir), x(R::Red));
    case Formula::NDVI:
      return ndvi(x(R::Nir), x(R::Red));
    case Formula::DVI:
      return x(R::Nir) - x(R::Red);
    case Formula::RDVI:
      return sqrt_den_div(x(R::Nir) - x(R::Red), x(R::Nir) + x(R::Red));
    case Formula::MSR: {
      const double sr = div(x(R::Nir), x(R::Red));
      return sqrt_den_div(sr - 1.0, sr + 1.0);
    }
    case Formula::GNDVI:
      return nd(x(R::Nir), x(R::Green));
    case Formula::GARI: {
      const double inner = x(R::Green) - p(0) * (x(R::Blue) - x(R::Red));
      return nd(x(R::Nir), inner);
    }
    case Formula::NDRE:
      return nd(x(R::Nir), x(R::RedEdge));
    case Formula::GDVI:
      return x(R::Nir) - x(R::Green);
    case Formula::GRVI:
      return div(x(R::Nir), x(R::Green));
    case Formula::IDVI: {
      const double d = x(R::Nir) - x(R::Red);
      return div(1.0 + d, 1.0 - d);
    }

    case Formula::ARI:
      return div(1.0, x(R::Green)) - div(1.0, x(R::RedEdge));
    case Formula::MARI:
      return (div(1.0, x(R::Green)) - div(1.0, x(R::RedEdge))) * x(R::Red);

    case Formula::EVI:
      return div(2.5 * (x(R::Nir) - x(R::Red)),
                 x(R::Nir) + 6.0 * x(R::Red) - 7.5 * x(R::Blue) + 1.0);
    case Formula::EVI2:
      return evi2(x(R::Nir), x(R::Red));

    case Formula::SAVI:
      return savi(x(R::Nir), x(R::Red), p(0));
    case Formula::MSAVI:
      return msavi(x(R::Nir), x(R::Red));
    case Formula::OSAVI:
      return 1.126 * div(x(R::Nir) - x(R::Red), x(R::Nir) + x(R::Red) + 0.126);

    case Formula::MBI:
      return mbi(x(R::Swir1), x(R::Swir2), x(R::Nir));
    case Formula::EMBI:
      return embi(mbi(x(R::Swir1), x(R::Swir2), x(R::Nir)), nd(x(R::Green), x(swir_long)));

    case Formula::TAVI:
      return div(x(R::Nir) + p(0) * (*ctx.m_red - x(R::Red)), x(R::Red));

    case Formula::NDHD:
      return nd(x(R::Hotspot), x(R::Darkspot));
    case Formula::NHVI2:
      return ndvi(x(R::Nir), x(R::Red)) * nd(x(R::Hotspot), x(R::Darkspot));
    case Formula::HSVI:
      return savi(x(R::Nir), x(R::Red), p(0)) * nd(x(R::Hotspot), x(R::Darkspot));
    case Formula::HEVI2:
      return evi2(x(R::Nir), x(R::Red)) * nd(x(R::Hotspot), x(R::Darkspot));

    case Formula::VIUPD:
      return div(updm->vegetation - 0.12 * updm->soil - updm->yellow,
                 updm->water + updm->vegetation + updm->soil);

    case Formula::NDWI:
      return nd(x(R::Green), x(R::Nir));
    case Formula::NDMI:
      return nd(x(R::Nir), x(swir));
    case Formula::MNDWI:
      return nd(x(R::Green), x(swir_long));

    case Formula::NBR:
      return nd(x(R::Nir), x(swir));
    case Formula::BAI: {
      const double dr = p(0) - x(R::Red);
      const double dn = p(1) - x(R::Nir);
      return div(1.0, dr * dr + dn * dn);
    }
    case Formula::NBRT1: {
      const double st = x(swir) * div(x(R::Thermal), p(0));
      return div(x(R::Nir) - st, x(R::Nir) + st);
    }

    case Formula::ASI: {
      const AsiParts c = asi_parts(x, swir_long);
      return phi(c.af, ctx.component(AsiComponent::AF)) *
             phi(c.vsf, ctx.component(AsiComponent::VSF)) *
             phi(c.ssf, ctx.component(AsiComponent::SSF)) *
             phi(c.mf, ctx.component(AsiComponent::MF));
    }
    case Formula::ASI_ALT: {
      const AsiParts c = asi_parts(x, swir_long);
      return (1.0 / 16.0) * (c.af + 1.0) * c.vsf * c.ssf * (c.mf + 1.0);
    }
    case Formula::AF:
      return af(x(R::Nir), x(R::Blue));
    case Formula::VSF:
      return vsf(x(R::Nir), x(R::Red));
    case Formula::SSF: {
      const double mndwi = nd(x(R::Green), x(swir_long));
      return 1.0 - embi(mbi(x(R::Swir1), x(R::Swir2), x(R::Nir)), mndwi);
    }
    case Formula::MF:
      return mf(x(R::Blue), x(R::Green), x(R::Nir), x(R::Swir1));

    case Formula::REI:
      return div(x(R::Nir) - x(R::Blue), x(R::Nir) + x(R::Blue) * x(R::Nir));
    case Formula::RI: {
      const double s = x(swir), n = x(R::Nir), b = x(R::Blue);
      return 1.0 - div(3.0 * std::min({s, n, b}), s + n + b);
    }

    case Formula::UI:
      return nd(x(R::Swir2), x(R::Nir));
    case Formula::NDBI:
      return nd(x(R::Swir1), x(R::Nir));
    case Formula::IBI: {
      const double ndbi = nd(x(R::Swir1), x(R::Nir));
      const double half =
          (savi(x(R::Nir), x(R::Red), p(0)) + nd(x(R::Green), x(swir_long))) / 2.0;
      return div(ndbi - half, ndbi + half);
    }
    case Formula::BCI: {
      const double hl = (x(R::TcH) + x(R::TcL)) / 2.0;
      return div(hl - x(R::TcV), hl + x(R::TcV));
    }
    case Formula::VGNIR_BI:
      return nd(x(R::Green), x(R::Nir));
    case Formula::PISI:
      return 0.8192 * x(R::Blue) - 0.5735 * x(R::Nir) + 0.0750;
    case Formula::BLFEI: {
      const double m = (x(R::Green) + x(R::Red) + x(R::Swir2)) / 3.0;
      return nd(m, x(R::Swir1));
    }
    case Formula::MUWI: {
      double acc = 0.0;
      for (const auto& [role, a] : ctx.muwi->weights) {
        acc += a * x(role);
      }
      return acc - ctx.muwi->offset;
    }
  }
  return kNaN;
}

}  // namespace msi::detail
