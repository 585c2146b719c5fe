#pragma once

// Scalar Gaussian and chi-square primitives plus the Genz bivariate
// normal rectangle probability used throughout the library.

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecmabund {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double norm_pdf(double z) {
    return 0.3989422804014326779 * std::exp(-0.5 * z * z);
}

inline double norm_cdf(double z) {
    return 0.5 * std::erfc(-z * 0.70710678118654752440);
}

// Wichura's PPND16 inverse normal CDF, |error| < 1e-15.
inline double norm_ppf(double p) {
    if (p <= 0.0) return -kInf;
    if (p >= 1.0) return kInf;
    const double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                    45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((5226.495278852545703 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                    21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double v;
    if (r <= 5.0) {
        r -= 1.6;
        v = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                 1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
              4.6303378461565452959) * r + 1.42343711074968357734) /
            (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                 0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
              2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        v = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                 0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
              5.4637849111641143699) * r + 6.6579046435011037772) /
            (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                 7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
              0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -v : v;
}

// Chi-square CDF with d degrees of freedom (regularized lower incomplete gamma).
inline double chi2_cdf(double x, int d) {
    if (x <= 0.0) return 0.0;
    const double a = 0.5 * d;
    const double xx = 0.5 * x;
    // series for xx < a+1, continued fraction otherwise
    const double lg = std::lgamma(a);
    if (xx < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            term *= xx / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-xx + a * std::log(xx) - lg);
    }
    double b = xx + 1.0 - a, c = 1e300, dd = 1.0 / b, h = dd;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        dd = an * dd + b;
        if (std::fabs(dd) < 1e-300) dd = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        dd = 1.0 / dd;
        const double del = dd * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(-xx + a * std::log(xx) - lg) * h;
}

namespace detail {

// Gauss-Legendre nodes/weights used by the Genz BVN quadrature.
inline constexpr std::array<double, 10> kBvnW6 = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
inline constexpr std::array<double, 10> kBvnX6 = {-0.9324695142031522, -0.6612093864662647, -0.238619186083197};
inline constexpr std::array<double, 10> kBvnW12 = {0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                                   0.2031674267230659,  0.2334925365383547, 0.2491470458134029};
inline constexpr std::array<double, 10> kBvnX12 = {-0.9815606342467191, -0.904117256370475,  -0.769902674194305,
                                                   -0.5873179542866171, -0.3678314989981802, -0.1252334085114692};
inline constexpr std::array<double, 10> kBvnW20 = {0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                                                   0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
                                                   0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
                                                   0.1527533871307259};
inline constexpr std::array<double, 10> kBvnX20 = {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259,
                                                   -0.8391169718222188, -0.7463319064601508, -0.636053680726515,
                                                   -0.5108670019508271, -0.3737060887154196, -0.2277858511416451,
                                                   -0.07652652113349733};

} // namespace detail

// Genz/Drezner-Wesolowsky upper-quadrant probability P(X > h, Y > k) for
// standard bivariate normal with correlation r. Absolute error < 5e-16.
inline double bvnu(double h, double k, double r) {
    if (std::isinf(h) || std::isinf(k)) {
        if (h == kInf || k == kInf) return 0.0;
        if (h == -kInf) return k == -kInf ? 1.0 : norm_cdf(-k);
        return norm_cdf(-h); // k == -inf
    }
    const double* w;
    const double* x;
    int lg;
    const double ar = std::fabs(r);
    if (ar < 0.3) {
        lg = 3;
        w = detail::kBvnW6.data();
        x = detail::kBvnX6.data();
    } else if (ar < 0.75) {
        lg = 6;
        w = detail::kBvnW12.data();
        x = detail::kBvnX12.data();
    } else {
        lg = 10;
        w = detail::kBvnW20.data();
        x = detail::kBvnX20.data();
    }
    double hk = h * k;
    double bvn = 0.0;
    if (ar < 0.925) {
        const double hs = 0.5 * (h * h + k * k);
        const double asr = std::asin(r);
        for (int i = 0; i < lg; ++i) {
            double sn = std::sin(asr * (x[i] + 1.0) / 2.0);
            bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            sn = std::sin(asr * (-x[i] + 1.0) / 2.0);
            bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
        bvn = bvn * asr / 12.566370614359172 + norm_cdf(-h) * norm_cdf(-k);
    } else {
        double kk = k;
        if (r < 0.0) {
            kk = -kk;
            hk = -hk;
        }
        if (ar < 1.0) {
            const double as = (1.0 - r) * (1.0 + r);
            double a = std::sqrt(as);
            const double bs = (h - kk) * (h - kk);
            const double c = (4.0 - hk) / 8.0;
            const double d = (12.0 - hk) / 16.0;
            bvn = a * std::exp(-(bs / as + hk) / 2.0) *
                  (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
            if (hk > -160.0) {
                const double b = std::sqrt(bs);
                bvn -= std::exp(-hk / 2.0) * 2.5066282746310002 * norm_cdf(-b / a) * b *
                       (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
            }
            a /= 2.0;
            for (int i = 0; i < lg; ++i) {
                double xs = a * (x[i] + 1.0);
                xs *= xs;
                double rs = std::sqrt(1.0 - xs);
                bvn += a * w[i] *
                       (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs -
                        std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
                xs = as * (1.0 - x[i]) * (1.0 - x[i]) / 4.0;
                rs = std::sqrt(1.0 - xs);
                bvn += a * w[i] * std::exp(-(bs / xs + hk) / 2.0) *
                       (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs)));
            }
            bvn = -bvn / 6.283185307179586;
        }
        if (r > 0.0) {
            bvn += norm_cdf(-std::max(h, kk));
        } else {
            bvn = -bvn + std::max(0.0, norm_cdf(-h) - norm_cdf(-kk));
        }
    }
    return std::max(0.0, std::min(1.0, bvn));
}

// P(l1 < X < u1, l2 < Y < u2) for standard bivariate normal, correlation rho.
// Handles infinite bounds and |rho| = 1 degeneracies.
inline double bvn_rect(double l1, double u1, double l2, double u2, double rho) {
    if (l1 >= u1 || l2 >= u2) return 0.0;
    if (rho >= 1.0) {
        const double lo = std::max(l1, l2), hi = std::min(u1, u2);
        return hi > lo ? norm_cdf(hi) - norm_cdf(lo) : 0.0;
    }
    if (rho <= -1.0) {
        const double lo = std::max(l1, -u2), hi = std::min(u1, -l2);
        return hi > lo ? norm_cdf(hi) - norm_cdf(lo) : 0.0;
    }
    const double p = bvnu(l1, l2, rho) - bvnu(u1, l2, rho) - bvnu(l1, u2, rho) + bvnu(u1, u2, rho);
    return std::max(0.0, std::min(1.0, p));
}

} // namespace ecmabund
