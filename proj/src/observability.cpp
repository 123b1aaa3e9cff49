#include "heatobs/observability.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "heatobs/kernels.hpp"
#include "heatobs/quad1d.hpp"

namespace heatobs {

namespace {

// Complex value with an absolute-error radius.
struct CVal {
    std::complex<double> v{0.0, 0.0};
    double e = 0.0;

    CVal operator*(const CVal& o) const {
        return {v * o.v, std::abs(v) * o.e + std::abs(o.v) * e + e * o.e};
    }
};

// integral over [a,b] of exp(-sigma eta^2) exp(-i delta eta) d eta, evaluated
// on its own scale so results far below ||.||-roundoff stay accurate.
CVal gauss_phase_interval(double sigma, double delta, double a, double b,
                          double rel_tol = 1e-12) {
    if (b <= a) return {};
    if (b <= 0.0) {  // mirror eta -> -eta and conjugate
        CVal m = gauss_phase_interval(sigma, delta, -b, -a, rel_tol);
        return {std::conj(m.v), m.e};
    }
    if (a < 0.0) {
        CVal neg = gauss_phase_interval(sigma, delta, 0.0, -a, rel_tol);
        CVal pos = gauss_phase_interval(sigma, delta, 0.0, b, rel_tol);
        return {std::conj(neg.v) + pos.v, neg.e + pos.e};
    }
    double base = sigma * a * a;
    double peak = std::exp(-base);
    if (peak == 0.0) return {{0.0, 0.0}, 2.0 * gauss_tail_mass(sigma, a)};
    // beyond b_eff the integrand is < peak * 1e-20
    double b_eff = std::min(b, std::sqrt(a * a + 46.0 / sigma));
    double wing = b_eff < b ? gauss_tail_mass(sigma, b_eff) : 0.0;
    // factor the peak out so the quadrature runs at O(1) scale even when the
    // true value is denormal-adjacent
    double scale = std::min(b_eff - a, 0.5 * std::sqrt(M_PI / sigma));
    auto re_f = [&](double t) {
        return std::exp(-(sigma * t * t - base)) * std::cos(delta * t);
    };
    auto im_f = [&](double t) {
        return -std::exp(-(sigma * t * t - base)) * std::sin(delta * t);
    };
    Certified re = adaptive_simpson(re_f, a, b_eff, rel_tol * scale);
    Certified im = adaptive_simpson(im_f, a, b_eff, rel_tol * scale);
    return {{peak * re.value, peak * im.value}, peak * (re.cert + im.cert) + wing};
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d4a68b021dfcb5ULL;
    return z ^ (z >> 31);
}

double unit_from(std::uint64_t& state) {  // in [-1, 1]
    return 2.0 * (double(splitmix64(state) >> 11) * 0x1.0p-53) - 1.0;
}

// l2 norm of the kept differences u(T,lambda_n) - u(T,n/N) over an adaptive
// cube, plus a certified bound on the omitted mass via the gradient envelope.
struct GapSum {
    double l2 = 0.0;
    double tail = 0.0;
    int M = 0;
    std::int64_t count = 0;
};

// |grad term| <= (|a|/sqrt(s)) (4 pi s)^{-d/2} e^{-|x-c|^2/(8s)}; encode the
// envelope as a width-2s mixture so the existing sample-tail bound applies.
GaussianMixtureField gradient_envelope(const GaussianMixtureField& u) {
    std::vector<GaussianTerm> env;
    for (const auto& t : u.terms()) {
        double amp = std::abs(t.amplitude) / std::sqrt(t.width) *
                     std::pow(2.0, 0.5 * u.dim());  // (4pi 2s)^{d/2} / (4pi s)^{d/2}
        env.push_back({amp, t.center, 2.0 * t.width});
    }
    return GaussianMixtureField(u.dim(), env);
}

GapSum perturbed_gap_sum(const GaussianMixtureField& uT, double N, double eps,
                         PerturbRule rule, std::uint64_t seed) {
    auto env = gradient_envelope(uT);
    GapSum g;
    for (int M = 4;; M = std::min(2 * M, 2048)) {
        double sq = 0.0;
        std::int64_t cnt = 0;
        for_each_index(uT.dim(), M, [&](const Index& n) {
            Vec lam = perturb_point(rule, n, N, eps, seed);
            double d = uT.evaluate(n.scaled(1.0 / N)) - uT.evaluate(lam);
            sq += d * d;
            ++cnt;
        });
        // shifted cube: every |lambda - n/N| <= eps/N < 1/N, one index unit
        g.tail = (eps / N) * mixture_sample_tail(env, N, M - 1);
        g.l2 = std::sqrt(sq);
        g.M = M;
        g.count = cnt;
        if (g.tail <= 1e-7 * g.l2 + 1e-280 || M >= 2048) return g;
    }
}

}  // namespace

double highband_point(const GaussianMixtureField& u, double N, const Vec& x) {
    double h = M_PI * N;
    double total = 0.0;
    for (const auto& t : u.terms()) {
        double sig = t.width;
        double pref = t.amplitude * std::pow(2 * M_PI, -double(u.dim()));
        // telescoping of prod(Full) - prod(In): sum over the first tail axis
        double acc = 0.0;
        double in_prefix = 1.0;
        for (int a = 0; a < u.dim(); ++a) {
            double delta = x[a] - t.center[a];
            double out = gauss_cos_tail(sig, delta, h).value;
            double full_suffix = 1.0;
            for (int b = a + 1; b < u.dim(); ++b) {
                double db = x[b] - t.center[b];
                full_suffix *= std::sqrt(M_PI / sig) * std::exp(-db * db / (4 * sig));
            }
            acc += out * in_prefix * full_suffix;
            in_prefix *= gauss_cos_band(sig, delta, h).value;
        }
        total += pref * acc;
    }
    return total;
}

Certified outband_energy_sq(const GaussianMixtureField& u, double N) {
    double h = M_PI * N;
    int d = u.dim();
    const auto& ts = u.terms();
    double val = 0.0, err = 0.0;
    for (size_t i = 0; i < ts.size(); ++i)
        for (size_t j = i; j < ts.size(); ++j) {
            double sig = ts[i].width + ts[j].width;
            double mult = (i == j ? 1.0 : 2.0) * ts[i].amplitude * ts[j].amplitude *
                          std::pow(2 * M_PI, -double(d));
            // prod(Full) - prod(In), telescoped so every addend carries one
            // genuinely small tail factor
            double acc = 0.0, acc_err = 0.0;
            double in_prefix = 1.0, in_prefix_err = 0.0;
            for (int a = 0; a < d; ++a) {
                double delta = ts[i].center[a] - ts[j].center[a];
                Certified out = gauss_cos_tail(sig, delta, h);
                double full_suffix = 1.0;
                for (int b = a + 1; b < d; ++b) {
                    double db = ts[i].center[b] - ts[j].center[b];
                    full_suffix *= std::sqrt(M_PI / sig) * std::exp(-db * db / (4 * sig));
                }
                acc += out.value * in_prefix * full_suffix;
                acc_err += (out.cert * std::abs(in_prefix) +
                            std::abs(out.value) * in_prefix_err) *
                           full_suffix;
                Certified in = gauss_cos_band(sig, delta, h);
                in_prefix_err = in_prefix_err * std::abs(in.value) +
                                std::abs(in_prefix) * in.cert;
                in_prefix *= in.value;
            }
            val += mult * acc;
            err += std::abs(mult) * acc_err;
        }
    // mathematically >= 0
    if (val < 0) {
        err += -val;
        val = 0.0;
    }
    return {val, err};
}

Certified aliasing_energy_sq(const GaussianMixtureField& u, double N) {
    double h = M_PI * N;
    int d = u.dim();
    const auto& ts = u.terms();
    if (ts.empty()) return {0.0, 0.0};

    double sig_min = 1e300, amp_max = 0.0;
    for (const auto& t : ts) {
        sig_min = std::min(sig_min, 2 * t.width);
        amp_max = std::max(amp_max, std::abs(t.amplitude));
    }
    // On the axis realizing max(|k|_inf,|k'|_inf) = K, the combination of the
    // separation prefactor e^{-s_i s_j (kappa-kappa')^2/sigma} and the shifted
    // integration interval suppresses each pair by at least
    // e^{-q max(1, K^2/2)}, q = sig_min (pi N)^2 (minimized over sign and
    // offset cases of (k_a, k'_a)).
    auto shell_env = [&](int K) {
        double q = sig_min * h * h;
        double expo = q * std::max(1.0, 0.5 * double(K) * double(K));
        double cnt = std::pow(2.0 * K + 1, 2 * d) - std::pow(2.0 * K - 1, 2 * d);
        return cnt * amp_max * amp_max * double(ts.size() * ts.size()) *
               std::pow(2 * M_PI, -double(d)) * std::pow(M_PI / sig_min, 0.5 * d) *
               std::exp(-expo);
    };

    double val = 0.0, err = 0.0;
    double accum_scale = 0.0;
    for (int K = 1; K <= 16; ++K) {
        double shell_val = 0.0, shell_err = 0.0, shell_abs = 0.0;
        std::vector<Index> kset;
        for_each_index(d, K, [&](const Index& k) {
            if (k.sup_norm() > 0) kset.push_back(k);
        });
        for (const auto& k : kset)
            for (const auto& kp : kset) {
                if (k.sup_norm() != K && kp.sup_norm() != K) continue;  // earlier shell
                for (size_t i = 0; i < ts.size(); ++i)
                    for (size_t j = 0; j < ts.size(); ++j) {
                        double si = ts[i].width, sj = ts[j].width;
                        double sig = si + sj;
                        CVal prod{std::complex<double>(1.0, 0.0), 0.0};
                        double logpref = 0.0;
                        bool dead = false;
                        for (int a = 0; a < d && !dead; ++a) {
                            double kap = 2 * h * k[a], kapp = 2 * h * kp[a];
                            double mu = (si * kap + sj * kapp) / sig;
                            double D = si * sj * (kap - kapp) * (kap - kapp) / sig;
                            logpref -= D;
                            if (logpref < -745.0) {
                                dead = true;
                                break;
                            }
                            double delta = ts[i].center[a] - ts[j].center[a];
                            double phase = delta * mu -
                                           (ts[i].center[a] * kap - ts[j].center[a] * kapp);
                            CVal g = gauss_phase_interval(sig, delta, -h + mu, h + mu);
                            CVal rot{std::complex<double>(std::cos(phase), std::sin(phase)),
                                     0.0};
                            prod = prod * rot * g;
                        }
                        if (dead) continue;
                        double pref = ts[i].amplitude * ts[j].amplitude *
                                      std::pow(2 * M_PI, -double(d)) * std::exp(logpref);
                        shell_val += pref * prod.v.real();
                        shell_err += std::abs(pref) * prod.e;
                        shell_abs += std::abs(pref) * (std::abs(prod.v) + prod.e);
                    }
            }
        val += shell_val;
        err += shell_err;
        accum_scale = std::max(accum_scale, shell_abs);
        double rem = 0.0;
        for (int Kp = K + 1; Kp <= K + 40; ++Kp) rem += shell_env(Kp);
        if (K >= 2 && rem <= 1e-10 * accum_scale + 1e-300) {
            err += rem;
            break;
        }
        if (K == 16) err += rem;
    }
    if (val < 0) {
        err += -val;
        val = 0.0;
    }
    return {val, err};
}

Certified residual_norm(const GaussianMixtureField& u0, double T, double N,
                        double rel_tol) {
    if (!(T > 0) || !(N > 0)) throw InputError("residual_norm: T, N must be positive");
    auto uT = u0.heat_evolve(T);
    Certified out2 = outband_energy_sq(uT, N);
    Certified alias2 = aliasing_energy_sq(uT, N);
    Certified sq{out2.value + alias2.value, out2.cert + alias2.cert};
    Certified r = certified_sqrt(sq);
    if (r.value > 0 && r.cert > rel_tol * r.value && r.value > 1e-300)
        throw CertificationError("residual_norm: certificate above requested tolerance", r);
    return r;
}

double residual_norm_oracle(const GaussianMixtureField& u0, double T, double N, int M) {
    auto uT = u0.heat_evolve(T);
    double nrm = uT.l2_norm();
    double corr = 0.0;
    for_each_index(u0.dim(), M, [&](const Index& n) {
        Vec x = n.scaled(1.0 / N);
        double a = uT.evaluate(x);
        double b = highband_point(uT, N, x);
        corr += a * a - 2 * a * b;
    });
    double sq = nrm * nrm - std::pow(N, -double(u0.dim())) * corr;
    return std::sqrt(std::max(0.0, sq));
}

Certified residual_norm_spectral(const GaussianMixtureField& u0, double T, double N,
                                 int cells_per_band) {
    auto uT = u0.heat_evolve(T);
    auto grid = FrequencyGrid::for_band(u0.dim(), N, cells_per_band, 0, T);
    auto f = SpectralGridField::from_gaussian(uT, grid);

    auto env = [&](int M) { return mixture_sample_tail(uT, N, M); };
    auto set = LatticeIndexSet::adaptive(u0.dim(), N, env, 1e-10 * std::max(1.0, uT.l2_norm()));
    auto sv = sample_mixture(uT, set);
    sv.tail_bound = set.tail_bound;
    auto interp = synthesize(N, sv).to_spectral(grid);

    Certified defect = (f.band_project(N, Band::low) - interp).l2_norm();
    Certified out2 = outband_energy_sq(uT, N);
    double sq = defect.value * defect.value + out2.value;
    double cert = 2 * defect.cert * (defect.value + defect.cert) + out2.cert +
                  2 * std::pow(N, -0.5 * u0.dim()) * sv.tail_bound *
                      (defect.value + 1.0);
    return certified_sqrt({sq, cert});
}

BoundReport residual(const GaussianMixtureField& u0, double T, double N, double C,
                     double rel_tol) {
    Certified r = residual_norm(u0, T, N, rel_tol);
    double tn2 = T * N * N;
    BoundReport rep;
    rep.name = "residual";
    rep.measured = r.value;
    rep.bound_rhs = C * (1 + std::pow(tn2, -0.25 * u0.dim())) * std::exp(-tn2) * u0.l2_norm();
    rep.certificate = r.cert;
    rep.certified = r.certified;
    rep.params = {{"d", double(u0.dim())}, {"T", T}, {"N", N}, {"C", C}};
    rep.policy = "residual=outband+aliasing_closed_form";
    return rep;
}

BoundReport sample_l2_report(const GaussianMixtureField& u0, double T, double N, double C) {
    if (!(T > 0) || !(N > 0)) throw InputError("sample_l2_report: T, N must be positive");
    auto uT = u0.heat_evolve(T);
    double scale = std::max(uT.l2_norm(), 1e-280);
    auto env = [&](int M) { return mixture_sample_tail(uT, N, M); };
    auto set = LatticeIndexSet::adaptive(u0.dim(), N, env, 1e-9 * scale);
    auto sv = sample_mixture(uT, set);
    double tn2 = T * N * N;
    BoundReport rep;
    rep.name = "sample_l2";
    rep.measured = sv.l2();
    rep.bound_rhs = C * (1 + std::pow(tn2, 0.25 * u0.dim())) * std::pow(T, -0.25 * u0.dim()) *
                    u0.l2_norm();
    rep.certificate = set.tail_bound;
    rep.params = {{"d", double(u0.dim())}, {"T", T}, {"N", N}, {"C", C},
                  {"M", set.radius}};
    rep.policy = "lattice=adaptive_cube";
    return rep;
}

PerturbRule perturb_rule_from_name(const std::string& name) {
    if (name == "alternating") return PerturbRule::alternating;
    if (name == "radial") return PerturbRule::radial;
    if (name == "pseudorandom") return PerturbRule::pseudorandom;
    throw InputError("unknown perturbation rule: " + name);
}

std::string perturb_rule_name(PerturbRule rule) {
    switch (rule) {
        case PerturbRule::alternating: return "alternating";
        case PerturbRule::radial: return "radial";
        case PerturbRule::pseudorandom: return "pseudorandom";
    }
    return "?";
}

Vec perturb_point(PerturbRule rule, const Index& n, double N, double eps,
                  std::uint64_t seed) {
    if (!(eps >= 0) || eps >= 1) throw InputError("perturb_point: eps must be in [0,1)");
    Vec x = n.scaled(1.0 / N);
    double step = eps / N;
    switch (rule) {
        case PerturbRule::alternating: {
            x[0] += (n[0] % 2 == 0 ? 1.0 : -1.0) * step;
            return x;
        }
        case PerturbRule::radial: {
            double r = x.norm();
            if (r == 0.0) return x;
            for (int a = 0; a < x.dim; ++a) x[a] += step * x[a] / r;
            return x;
        }
        case PerturbRule::pseudorandom: {
            std::uint64_t state = seed * 0x9e3779b97f4a7c15ULL + 0xda942042e4dd58b5ULL;
            for (int a = 0; a < n.dim; ++a)
                state ^= splitmix64(state) + std::uint64_t(std::int64_t(n[a]) + (1 << 20));
            Vec v = Vec::zero(n.dim);
            for (int a = 0; a < n.dim; ++a) v[a] = unit_from(state);
            double len = v.norm();
            double sc = len > 1.0 ? step / len : step;
            for (int a = 0; a < x.dim; ++a) x[a] += sc * v[a];
            return x;
        }
    }
    return x;
}

BoundReport perturbed_residual(const GaussianMixtureField& u0, double T, double N, double eps,
                               PerturbRule rule, double C, std::uint64_t seed) {
    if (!(T > 0) || !(N > 0)) throw InputError("perturbed_residual: T, N must be positive");
    auto uT = u0.heat_evolve(T);
    Certified out2 = outband_energy_sq(uT, N);
    Certified alias2 = aliasing_energy_sq(uT, N);
    double nd = std::pow(N, -double(u0.dim()));

    // Rtilde = R + sum_n (u(T,n/N) - u(T,lambda_n)) f_{N,n}; the basis part is
    // orthogonal to the out-of-cube part, and the cross term against the
    // unperturbed basis coefficients is bounded into the certificate.
    GapSum gap = perturbed_gap_sum(uT, N, eps, rule, seed);
    double gap_l2_hi = gap.l2 + gap.tail;
    double alias_l2 = std::sqrt(std::max(0.0, alias2.value * std::pow(N, double(u0.dim()))) ) ;
    double sq = out2.value + alias2.value + nd * gap.l2 * gap.l2;
    double cert = out2.cert + alias2.cert + nd * (gap.tail * gap.tail + 2 * gap.tail * gap.l2) +
                  2 * nd * gap_l2_hi * alias_l2;
    Certified r = certified_sqrt({sq, cert});

    double tn2 = T * N * N;
    BoundReport rep;
    rep.name = "perturbed_residual";
    rep.measured = r.value;
    rep.bound_rhs = C *
                    (eps + (1 + std::pow(tn2, -0.5)) * std::pow(tn2, -0.25 * u0.dim()) *
                               std::exp(-tn2)) *
                    u0.l2_norm();
    rep.certificate = r.cert;
    rep.certified = r.certified;
    rep.params = {{"d", double(u0.dim())}, {"T", T},      {"N", N},
                  {"eps", eps},            {"C", C},      {"M", double(gap.M)},
                  {"seed", double(seed)},  {"rule", double(int(rule))}};
    rep.policy = "rule=" + perturb_rule_name(rule);
    return rep;
}

BoundReport perturbed_sample_gap(const GaussianMixtureField& u0, double T, double N,
                                 double eps, PerturbRule rule, double C,
                                 std::uint64_t seed) {
    if (!(T > 0) || !(N > 0)) throw InputError("perturbed_sample_gap: T, N must be positive");
    auto uT = u0.heat_evolve(T);
    GapSum gap = perturbed_gap_sum(uT, N, eps, rule, seed);
    double tn2 = T * N * N;
    BoundReport rep;
    rep.name = "perturbed_sample_gap";
    rep.measured = gap.l2;
    rep.bound_rhs = C * eps * std::pow(N, 0.5 * u0.dim()) *
                    (1 + std::pow(tn2, -0.25 * u0.dim() - 0.5) * std::exp(-tn2)) *
                    u0.l2_norm();
    rep.certificate = gap.tail;
    rep.params = {{"d", double(u0.dim())}, {"T", T},     {"N", N}, {"eps", eps},
                  {"C", C},                {"M", double(gap.M)}, {"seed", double(seed)}};
    rep.policy = "rule=" + perturb_rule_name(rule);
    return rep;
}

GaussianMixtureField standard_trial_field(int dim, int index, double T) {
    if (index == 0)
        return GaussianMixtureField::single(1.0, Vec::zero(dim), 1000.0 * T);
    std::uint64_t state = 0x5bd1e995u * std::uint64_t(index);
    int nterms = 1 + int(splitmix64(state) % 3);
    std::vector<GaussianTerm> ts;
    for (int t = 0; t < nterms; ++t) {
        GaussianTerm g;
        g.amplitude = unit_from(state) + (unit_from(state) > 0 ? 0.25 : -0.25);
        g.center = Vec::zero(dim);
        for (int a = 0; a < dim; ++a) g.center[a] = 2.0 * unit_from(state);
        g.width = 0.35 + 1.8 * std::abs(unit_from(state));
        ts.push_back(g);
    }
    return GaussianMixtureField(dim, ts);
}

BoundReport operator_decomposition_report(int dim, double T, double N, int trials,
                                          double C) {
    if (trials < 1) throw InputError("operator_decomposition_report: trials >= 1");
    double worst_r = 0.0, worst_w = 0.0, cert = 0.0;
    for (int i = 0; i < trials; ++i) {
        auto u0 = standard_trial_field(dim, i, T);
        double nrm = u0.l2_norm();
        Certified r = residual_norm(u0, T, N, 1e-4);
        worst_r = std::max(worst_r, r.value / nrm);
        cert = std::max(cert, r.cert / nrm);

        auto uT = u0.heat_evolve(T);
        auto env = [&](int M) { return mixture_sample_tail(uT, N, M); };
        auto set = LatticeIndexSet::adaptive(dim, N, env, 1e-8 * nrm);
        auto sv = sample_mixture(uT, set);
        double w = std::pow(N, -0.5 * dim) * sv.l2() / nrm;
        worst_w = std::max(worst_w, w);
    }
    double tn2 = T * N * N;
    double smallness = C * (1 + std::pow(tn2, -0.25 * dim)) * std::exp(-tn2);
    BoundReport rep;
    rep.name = "operator_decomposition";
    rep.measured = worst_r;
    rep.bound_rhs = smallness <= 0.1 ? 0.1 : smallness;
    rep.certificate = cert;
    rep.params = {{"d", double(dim)},       {"T", T},
                  {"N", N},                 {"trials", double(trials)},
                  {"C", C},                 {"w_ratio", worst_w},
                  {"smallness", smallness}, {"condition_holds", smallness <= 0.1 ? 1.0 : 0.0}};
    rep.policy = "trials=standard_trial_field";
    return rep;
}

ConstantCalibration calibrate_constant(const std::string& name,
                                       const std::vector<BoundReport>& c1_reports,
                                       const std::string& sweep_desc) {
    if (c1_reports.empty()) throw InputError("calibrate_constant: empty sweep");
    ConstantCalibration cal;
    cal.name = name;
    cal.sweep = sweep_desc;
    for (const auto& r : c1_reports) {
        if (!r.certified)
            throw CertificationError("calibrate_constant: uncertified point in sweep " + name,
                                     {r.measured, r.certificate, false});
        double ratio = r.ratio();
        if (std::isfinite(ratio)) cal.max_ratio = std::max(cal.max_ratio, ratio);
    }
    cal.fitted = cal.max_ratio;
    return cal;
}

}  // namespace heatobs
