#include "susylab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "susylab/errors.hpp"

namespace susylab::quadrature {

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (QUADPACK values).
// xk[0] is the center; entries 1..7 are mirrored +-.
constexpr double xk[8] = {
    0.0,
    2.0778495500789846760068940377324491347978440714517064971384573462e-01,
    4.0584515137739716690660641207696146334738201409937012638704325179e-01,
    5.8608723546769113029414483825872959843678075060436095130499289320e-01,
    7.4153118559939443986386477328078840707414764714139026011995535197e-01,
    8.6486442335976907278971278864092620121097230707408814860145771277e-01,
    9.4910791234275852452618968404785126240077093767061778354876910391e-01,
    9.9145537112081263920685469752632851664204433837033470129108741357e-01,
};
constexpr double wk[8] = {
    2.0948214108472782801299917489171426369776208022370431671299800656e-01,
    2.0443294007529889241416199923464908471651760418071835742447095312e-01,
    1.9035057806478540991325640242101368282607807545535835588544088037e-01,
    1.6900472663926790282658342659855028410624490030294424149734006756e-01,
    1.4065325971552591874518959051023792039988975724799857556174546893e-01,
    1.0479001032225018383987632254151801744375665421383061189339065134e-01,
    6.3092092629978553290700663189204286665071157211550707113605545147e-02,
    2.2935322010529224963732008058969591993560811275746992267507430255e-02,
};
// Embedded Gauss-7 weights at xk[0], xk[2], xk[4], xk[6].
constexpr double wg[4] = {
    4.1795918367346938775510204081632653061224489795918367346938775510e-01,
    3.8183005050511894495036977548897513387836508353386273475108345103e-01,
    2.7970539148927666790146777142377958248692506522659876453701403269e-01,
    1.2948496616886969327061143267908201832858740225994666397720863872e-01,
};

struct Panel {
    double a, b;
    cplx value;
    double error;
};

struct PanelWorse {
    bool operator()(const Panel& x, const Panel& y) const {
        if (x.error != y.error) return x.error < y.error;
        return x.a > y.a;  // deterministic tie-break
    }
};

Panel eval_panel(const Integrand& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    cplx fc = f(c);
    cplx k15 = wk[0] * fc;
    cplx g7 = wg[0] * fc;
    for (int i = 1; i < 8; ++i) {
        cplx s = f(c + h * xk[i]) + f(c - h * xk[i]);
        k15 += wk[i] * s;
        if ((i & 1) == 0) g7 += wg[i / 2] * s;
    }
    k15 *= h;
    g7 *= h;
    double diff = std::abs(k15 - g7);
    double err = 200.0 * diff;
    err = std::min(err * std::sqrt(err), 10.0 * diff);
    if (diff > 0.0 && err == 0.0) err = diff;
    return {a, b, k15, err};
}

QuadResult run_adaptive(const Integrand& f, std::vector<double> edges, const QuadOptions& opt) {
    std::priority_queue<Panel, std::vector<Panel>, PanelWorse> heap;
    cplx total{0.0, 0.0};
    double toterr = 0.0;
    long evals = 0;
    int panels = 0;

    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        Panel p = eval_panel(f, edges[i], edges[i + 1]);
        evals += 15;
        ++panels;
        total += p.value;
        toterr += p.error;
        heap.push(p);
    }

    auto good_enough = [&] {
        return toterr <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
    };

    bool ok = good_enough();
    while (!ok && panels < opt.max_panels && !heap.empty()) {
        Panel worst = heap.top();
        // stop refining once the dominant panel cannot be split further
        if (worst.b - worst.a < 1e-15 * (1.0 + std::abs(worst.a))) break;
        heap.pop();
        total -= worst.value;
        toterr -= worst.error;
        double mid = 0.5 * (worst.a + worst.b);
        Panel left = eval_panel(f, worst.a, mid);
        Panel right = eval_panel(f, mid, worst.b);
        evals += 30;
        ++panels;
        total += left.value + right.value;
        toterr += left.error + right.error;
        heap.push(left);
        heap.push(right);
        ok = good_enough();
    }

    // Deterministic final reduction: drain and sum panels by position.
    std::vector<Panel> all;
    all.reserve(heap.size());
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    cplx sum{0.0, 0.0};
    double err = 0.0;
    for (const Panel& p : all) {
        sum += p.value;
        err += p.error;
    }
    return {sum, err, evals, ok};
}

std::vector<double> make_edges(double a, double b, std::span<const double> breakpoints) {
    std::vector<double> edges;
    edges.push_back(a);
    for (double x : breakpoints)
        if (x > a && x < b) edges.push_back(x);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

}  // namespace

QuadResult integrate(const Integrand& f, double a, double b, const QuadOptions& opt) {
    return integrate(f, a, b, {}, opt);
}

QuadResult integrate(const Integrand& f, double a, double b,
                     std::span<const double> breakpoints, const QuadOptions& opt) {
    if (!(a < b)) throw usage_error("integrate: need a < b");
    if (!std::isfinite(a) || !std::isfinite(b))
        throw usage_error("integrate: endpoints must be finite");
    return run_adaptive(f, make_edges(a, b, breakpoints), opt);
}

QuadResult integrate_from(const Integrand& f, double lo, const QuadOptions& opt) {
    return integrate_from(f, lo, {}, opt);
}

QuadResult integrate_from(const Integrand& f, double lo,
                          std::span<const double> breakpoints, const QuadOptions& opt) {
    if (!std::isfinite(lo) || lo < 0.0)
        throw usage_error("integrate_from: need finite lo >= 0");
    // r = tan(u): int_lo^inf f(r) dr = int_atan(lo)^{pi/2} f(tan u) sec^2 u du
    auto g = [&f](double u) -> cplx {
        double c = std::cos(u);
        double r = std::tan(u);
        return f(r) / (c * c);
    };
    std::vector<double> bp;
    bp.reserve(breakpoints.size() + 8);
    for (double r : breakpoints)
        if (r > lo && std::isfinite(r)) bp.push_back(std::atan(r));
    // seed panels so the initial estimate sees several scales of r
    for (double r : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0})
        if (r > lo) bp.push_back(std::atan(r));
    const double half_pi = std::asin(1.0);
    return run_adaptive(g, make_edges(std::atan(lo), half_pi, bp), opt);
}

QuadResult cauchy_expectation(const Integrand& f, const QuadOptions& opt) {
    // w = tan(t): int f dmu = pi^{-1} int_{-pi/2}^{pi/2} f(tan t) dt
    auto g = [&f](double t) -> cplx { return f(std::tan(t)); };
    const double half_pi = std::asin(1.0);
    std::vector<double> bp;
    for (double w : {-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0}) bp.push_back(std::atan(w));
    QuadResult r = run_adaptive(g, make_edges(-half_pi, half_pi, bp), opt);
    const double pi = 2.0 * half_pi;
    r.value /= pi;
    r.error /= pi;
    return r;
}

cplx trapezoid_periodic(const Integrand& f, int n) {
    if (n < 1) throw usage_error("trapezoid_periodic: need n >= 1");
    const double pi = 2.0 * std::asin(1.0);
    cplx s{0.0, 0.0};
    for (int k = 0; k < n; ++k) s += f(2.0 * pi * double(k) / double(n));
    return s * (2.0 * pi / double(n));
}

QuadResult trapezoid_periodic_adaptive(const Integrand& f, const QuadOptions& opt,
                                       int n0, int max_n) {
    if (n0 < 2) throw usage_error("trapezoid_periodic_adaptive: need n0 >= 2");
    QuadResult out;
    cplx prev = trapezoid_periodic(f, n0);
    out.evals = n0;
    for (int n = 2 * n0; n <= max_n; n *= 2) {
        cplx cur = trapezoid_periodic(f, n);
        out.evals += n;
        double delta = std::abs(cur - prev);
        if (delta <= std::max(opt.abs_tol, opt.rel_tol * std::abs(cur))) {
            out.value = cur;
            out.error = delta;
            out.converged = true;
            return out;
        }
        prev = cur;
    }
    out.value = prev;
    out.error = std::abs(prev);
    out.converged = false;
    return out;
}

}
