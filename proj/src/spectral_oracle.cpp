#include "lowdim/spectral_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "lowdim/error.hpp"

namespace lowdim {

namespace {

constexpr int kMaxOrder = 20;
constexpr int kMaxRoot = 20;
constexpr double kPi = std::numbers::pi;

[[noreturn]] void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, "spectral_oracle", message);
}

long double series(int n, long double x) {
    const long double half = x / 2;
    long double term = 1.0L;
    for (int i = 1; i <= n; ++i) term *= half / i;
    long double sum = term;
    const long double q = -half * half;
    for (int m = 0; m < 500; ++m) {
        term *= q / ((m + 1.0L) * (m + 1.0L + n));
        sum += term;
        if (m > x && std::fabs(term) < 1e-24L * std::max(std::fabs(sum), 1e-300L)) break;
    }
    return sum;
}

// Backward recurrence from a high even order, normalized by J_0 + 2 sum J_2k = 1.
long double miller(int n, long double x) {
    const int top = std::max(n, static_cast<int>(std::ceil(x)));
    const int start = 2 * ((top + 30 + static_cast<int>(std::sqrt(60.0 * top))) / 2);
    long double next = 0.0L, cur = 1e-30L, result = 0.0L, norm = 0.0L;
    for (int m = start; m > 0; --m) {
        const long double prev = 2.0L * m / x * cur - next;
        next = cur;
        cur = prev;  // J_{m-1}
        if (m - 1 == n) result = cur;
        if ((m - 1) % 2 == 0 && m - 1 > 0) norm += 2.0L * cur;
        if (std::fabs(cur) > 1e300L) {
            cur *= 1e-300L;
            next *= 1e-300L;
            result *= 1e-300L;
            norm *= 1e-300L;
        }
    }
    norm += cur;
    return result / norm;
}

// No domain checks; orders up to 21 are needed for derivatives.
double j_raw(int n, double x) {
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    return static_cast<double>(x <= 12.0 ? series(n, x) : miller(n, x));
}

double jprime_raw(int n, double x) {
    if (n == 0) return -j_raw(1, x);
    return 0.5 * (j_raw(n - 1, x) - j_raw(n + 1, x));
}

double jsecond_raw(int n, double x) {
    // Bessel's equation: x^2 J'' + x J' + (x^2 - n^2) J = 0.
    return -jprime_raw(n, x) / x - (1.0 - static_cast<double>(n * n) / (x * x)) * j_raw(n, x);
}

double find_root(int n, int k) {
    const double step = kPi / 8.0;
    int found = 0;
    double a = step;
    double fa = jprime_raw(n, a);
    for (int i = 2; a < 100.0; ++i) {
        const double b = std::min(100.0, i * step);
        const double fb = jprime_raw(n, b);
        if ((fa < 0.0) != (fb < 0.0) && fa != 0.0) {
            if (++found == k) {
                double lo = a, hi = b, flo = fa;
                for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = jprime_raw(n, mid);
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                double x = 0.5 * (lo + hi);
                for (int it = 0; it < 3; ++it) {
                    const double d2 = jsecond_raw(n, x);
                    if (d2 == 0.0) break;
                    const double nx = x - jprime_raw(n, x) / d2;
                    if (!(nx > a && nx < b)) break;
                    x = nx;
                }
                return x;
            }
        }
        if (b >= 100.0) break;
        a = b;
        fa = fb;
    }
    fail(ErrorKind::RootNotBracketed,
         "root " + std::to_string(k) + " of J_" + std::to_string(n) + "' not bracketed below 100");
}

struct RootTable {
    std::array<std::array<double, kMaxRoot>, kMaxOrder + 1> roots{};
    RootTable() {
        for (int n = 0; n <= kMaxOrder; ++n) {
            for (int k = 1; k <= kMaxRoot; ++k) roots[n][k - 1] = find_root(n, k);
        }
    }
};

const RootTable& root_table() {
    static const RootTable table;
    return table;
}

// 4-point Gauss-Legendre on [-1, 1].
constexpr double kGx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
constexpr double kGw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};

// Composite Gauss nodes and weights on [0, b]: 64 panels x 4 points.
void radial_rule(double b, std::vector<double>& x, std::vector<double>& w) {
    constexpr int kPanels = 64;
    const double width = b / kPanels;
    x.clear();
    w.clear();
    for (int p = 0; p < kPanels; ++p) {
        const double mid = (p + 0.5) * width;
        for (int g = 0; g < 4; ++g) {
            x.push_back(mid + 0.5 * width * kGx[g]);
            w.push_back(0.5 * width * kGw[g]);
        }
    }
}

}  // namespace

double bessel_j(int n, double x) {
    if (n < 0 || n > kMaxOrder || !(x >= 0.0) || x > 100.0) {
        fail(ErrorKind::DomainError, "bessel_j needs 0 <= n <= 20 and 0 <= x <= 100");
    }
    return j_raw(n, x);
}

double bessel_j_derivative(int n, double x) {
    if (n < 0 || n > kMaxOrder || !(x >= 0.0) || x > 100.0) {
        fail(ErrorKind::DomainError, "bessel_j_derivative needs 0 <= n <= 20 and 0 <= x <= 100");
    }
    return jprime_raw(n, x);
}

double bessel_jprime_root(int n, int k) {
    if (n < 0 || n > kMaxOrder || k < 1 || k > kMaxRoot) {
        fail(ErrorKind::DomainError, "root table covers 0 <= n <= 20 and 1 <= k <= 20");
    }
    return root_table().roots[n][k - 1];
}

EigenbasisEntry disc_neumann_mode(int n, int k, bool cosine, double radius) {
    if (!(radius > 0.0)) fail(ErrorKind::DomainError, "disc radius must be positive");
    const double root = bessel_jprime_root(n, k);
    std::vector<double> rx, rw;
    radial_rule(radius, rx, rw);
    double radial = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double j = j_raw(n, root * rx[i] / radius);
        radial += rw[i] * j * j * rx[i];
    }
    const double norm = std::sqrt((n == 0 ? 2.0 * kPi : kPi) * radial);

    EigenbasisEntry e;
    e.kind = EigenbasisEntry::Kind::Disc;
    e.n = n;
    e.k = k;
    e.cosine = cosine || n == 0;
    e.eigenvalue = root * root / (radius * radius);
    e.norm = norm;
    const bool use_cos = e.cosine;
    e.evaluate = [n, root, radius, norm, use_cos](const std::array<double, 2>& p) {
        const double r = std::hypot(p[0], p[1]);
        const double phi = std::atan2(p[1], p[0]);
        const double angular = n == 0 ? 1.0 : (use_cos ? std::cos(n * phi) : std::sin(n * phi));
        return angular * j_raw(n, root * r / radius) / norm;
    };
    return e;
}

EigenbasisEntry interval_neumann_mode(int m, double length) {
    if (m < 0 || !(length > 0.0)) fail(ErrorKind::DomainError, "interval mode needs m >= 0 and length > 0");
    EigenbasisEntry e;
    e.kind = EigenbasisEntry::Kind::Interval;
    e.n = m;
    e.cosine = true;
    e.eigenvalue = (m * kPi / length) * (m * kPi / length);
    e.norm = m == 0 ? std::sqrt(length) : std::sqrt(0.5 * length);
    const double norm = e.norm;
    e.evaluate = [m, length, norm](const std::array<double, 2>& p) {
        return std::cos(m * kPi * (p[0] + 0.5 * length) / length) / norm;
    };
    return e;
}

HFamilyEntry h_family(int index) {
    if (index < 1 || index > 100) fail(ErrorKind::DomainError, "H family index must lie in 1..100");
    HFamilyEntry h;
    h.index = index;
    double linear = 0.0;
    if (index % 2 == 1) {
        h.branch = HFamilyEntry::Branch::Odd;
    } else if (index % 4 == 2) {
        h.branch = HFamilyEntry::Branch::FourKMinus2;
        linear = 1.0;
    } else {
        h.branch = HFamilyEntry::Branch::FourK;
        linear = -1.0;
    }
    const double a = 0.5 * kPi * index;
    h.value = [a, linear](double x) { return std::sin(a * x) + linear * a * x; };
    h.derivative = [a, linear](double x) { return a * std::cos(a * x) + linear * a; };
    return h;
}

ExpansionSolution eigen_expansion_solve(const ComponentShape& component, const LocalFunction& f, int N) {
    if (N < 0) fail(ErrorKind::DomainError, "truncation must be nonnegative");
    ExpansionSolution out;
    if (component.is_segment()) {
        const double L = component.measure();
        constexpr int kPanels = 256;
        std::vector<double> xs, ws, fs;
        const double width = L / kPanels;
        for (int p = 0; p < kPanels; ++p) {
            const double mid = -0.5 * L + (p + 0.5) * width;
            for (int g = 0; g < 4; ++g) {
                xs.push_back(mid + 0.5 * width * kGx[g]);
                ws.push_back(0.5 * width * kGw[g]);
                fs.push_back(f({xs.back(), 0.0}));
            }
        }
        double f_sq = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) f_sq += ws[i] * fs[i] * fs[i];
        std::vector<EigenbasisEntry> modes;
        std::vector<double> coeffs;
        double captured = 0.0;
        for (int m = 0; m <= N; ++m) {
            auto e = interval_neumann_mode(m, L);
            double a = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) a += ws[i] * fs[i] * e.evaluate({xs[i], 0.0});
            captured += a * a;
            if (m == 0) continue;
            modes.push_back(std::move(e));
            coeffs.push_back(a / modes.back().eigenvalue);
        }
        out.modes = N;
        out.tail_bound = std::sqrt(std::max(0.0, f_sq - captured)) / interval_neumann_mode(N + 1, L).eigenvalue;
        auto shared_modes = std::make_shared<std::vector<EigenbasisEntry>>(std::move(modes));
        out.evaluate = [shared_modes, coeffs](const std::array<double, 2>& p) {
            double u = 0.0;
            for (std::size_t i = 0; i < coeffs.size(); ++i) u += coeffs[i] * (*shared_modes)[i].evaluate(p);
            return u;
        };
        return out;
    }

    const double R = component.disc().radius;
    struct Key {
        double lambda;
        int n, k;
        bool cosine;
    };
    std::vector<Key> keys;
    for (int n = 0; n <= kMaxOrder; ++n) {
        for (int k = 1; k <= kMaxRoot; ++k) {
            const double root = bessel_jprime_root(n, k);
            const double lambda = root * root / (R * R);
            keys.push_back({lambda, n, k, true});
            if (n > 0) keys.push_back({lambda, n, k, false});
        }
    }
    std::stable_sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) { return a.lambda < b.lambda; });
    if (N >= static_cast<int>(keys.size())) fail(ErrorKind::DomainError, "truncation exceeds the disc root table");

    std::vector<double> rx, rw;
    radial_rule(R, rx, rw);
    constexpr int kAngles = 256;
    std::vector<double> fgrid(rx.size() * kAngles);
    double f_sq = 0.0, f_mean = 0.0;
    const double dphi = 2.0 * kPi / kAngles;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        for (int a = 0; a < kAngles; ++a) {
            const double phi = a * dphi;
            const double v = f({rx[i] * std::cos(phi), rx[i] * std::sin(phi)});
            fgrid[i * kAngles + a] = v;
            f_sq += rw[i] * rx[i] * dphi * v * v;
            f_mean += rw[i] * rx[i] * dphi * v;
        }
    }
    double captured = f_mean * f_mean / (kPi * R * R);
    std::vector<EigenbasisEntry> modes;
    std::vector<double> coeffs;
    for (int m = 0; m < N; ++m) {
        auto e = disc_neumann_mode(keys[m].n, keys[m].k, keys[m].cosine, R);
        double a = 0.0;
        for (std::size_t i = 0; i < rx.size(); ++i) {
            const double radial = j_raw(e.n, bessel_jprime_root(e.n, e.k) * rx[i] / R) / e.norm;
            double ang = 0.0;
            for (int t = 0; t < kAngles; ++t) {
                const double phi = t * dphi;
                const double factor = e.n == 0 ? 1.0 : (e.cosine ? std::cos(e.n * phi) : std::sin(e.n * phi));
                ang += factor * fgrid[i * kAngles + t];
            }
            a += rw[i] * rx[i] * dphi * radial * ang;
        }
        captured += a * a;
        coeffs.push_back(a / e.eigenvalue);
        modes.push_back(std::move(e));
    }
    out.modes = N;
    out.tail_bound = std::sqrt(std::max(0.0, f_sq - captured)) / keys[N].lambda;
    auto shared_modes = std::make_shared<std::vector<EigenbasisEntry>>(std::move(modes));
    out.evaluate = [shared_modes, coeffs](const std::array<double, 2>& p) {
        double u = 0.0;
        for (std::size_t i = 0; i < coeffs.size(); ++i) u += coeffs[i] * (*shared_modes)[i].evaluate(p);
        return u;
    };
    return out;
}

std::string spectrum_csv(int n_max, int k_max) {
    if (n_max < 0 || n_max > kMaxOrder || k_max < 1 || k_max > kMaxRoot) {
        fail(ErrorKind::DomainError, "spectrum table covers n <= 20 and k <= 20");
    }
    std::string out = "n,k,root,eigenvalue\n";
    char buf[96];
    for (int n = 0; n <= n_max; ++n) {
        for (int k = 1; k <= k_max; ++k) {
            const double root = bessel_jprime_root(n, k);
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", n, k, root, root * root);
            out += buf;
        }
    }
    return out;
}

}  // namespace lowdim
