#include "susylab/grassmann.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>

#include "susylab/errors.hpp"

namespace susylab::grassmann {

namespace {

// Bits strictly below / strictly above position `bit` (0-based).
inline std::uint64_t below_mask(int bit) {
    return (bit == 0) ? 0ULL : (~0ULL >> (64 - bit));
}
inline std::uint64_t above_mask(int bit) {
    return (bit == 63) ? 0ULL : (~0ULL << (bit + 1));
}

// Parity of #{(i,j) : i in I, j in J, i > j}; the reordering sign of
// chi^I chi^J into canonical order is (-1)^inv.
inline int merge_sign(std::uint64_t I, std::uint64_t J) {
    int inv = 0;
    std::uint64_t j = J;
    while (j) {
        int bit = std::countr_zero(j);
        inv += std::popcount(I & above_mask(bit));
        j &= j - 1;
    }
    return (inv & 1) ? -1 : 1;
}

void check_same_algebra(const GrassmannElement& a, const GrassmannElement& b) {
    if (a.generators() != b.generators())
        throw usage_error("grassmann: operands live in different algebras");
}

void check_generator_index(int q, int j) {
    if (j < 1 || j > q)
        throw usage_error("grassmann: generator index out of range");
}

}  // namespace

// ===== GrassmannElement =====

GrassmannElement::GrassmannElement(int q) : q_(q) {
    if (q < 0 || q > 64) throw usage_error("grassmann: need 0 <= q <= 64");
}

GrassmannElement GrassmannElement::scalar(int q, cplx c) {
    GrassmannElement e(q);
    if (c != cplx(0.0)) e.terms_.push_back({0ULL, c});
    return e;
}

GrassmannElement GrassmannElement::generator(int q, int j) {
    GrassmannElement e(q);
    check_generator_index(q, j);
    e.terms_.push_back({1ULL << (j - 1), cplx(1.0)});
    return e;
}

GrassmannElement GrassmannElement::monomial(int q, std::uint64_t mask, cplx c) {
    GrassmannElement e(q);
    if (q < 64 && (mask >> q) != 0)
        throw usage_error("grassmann: monomial mask mentions generators beyond q");
    if (c != cplx(0.0)) e.terms_.push_back({mask, c});
    return e;
}

cplx GrassmannElement::coeff(std::uint64_t mask) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), mask,
                               [](const Term& t, std::uint64_t m) { return t.mask < m; });
    if (it != terms_.end() && it->mask == mask) return it->coeff;
    return cplx(0.0);
}

GrassmannElement GrassmannElement::nilpotent_part() const {
    GrassmannElement e(q_);
    e.terms_.reserve(terms_.size());
    for (const Term& t : terms_)
        if (t.mask != 0) e.terms_.push_back(t);
    return e;
}

bool GrassmannElement::is_scalar() const {
    return terms_.empty() || (terms_.size() == 1 && terms_[0].mask == 0);
}

bool GrassmannElement::is_even() const {
    for (const Term& t : terms_)
        if (std::popcount(t.mask) & 1) return false;
    return true;
}

bool GrassmannElement::is_odd() const {
    for (const Term& t : terms_)
        if (!(std::popcount(t.mask) & 1)) return false;
    return true;
}

int GrassmannElement::max_degree() const {
    int d = 0;
    for (const Term& t : terms_) d = std::max(d, std::popcount(t.mask));
    return d;
}

GrassmannElement GrassmannElement::operator-() const {
    GrassmannElement e(*this);
    for (Term& t : e.terms_) t.coeff = -t.coeff;
    return e;
}

GrassmannElement& GrassmannElement::operator+=(const GrassmannElement& rhs) {
    check_same_algebra(*this, rhs);
    std::vector<Term> merged;
    merged.reserve(terms_.size() + rhs.terms_.size());
    std::size_t i = 0, j = 0;
    while (i < terms_.size() || j < rhs.terms_.size()) {
        if (j == rhs.terms_.size() || (i < terms_.size() && terms_[i].mask < rhs.terms_[j].mask)) {
            merged.push_back(terms_[i++]);
        } else if (i == terms_.size() || rhs.terms_[j].mask < terms_[i].mask) {
            merged.push_back(rhs.terms_[j++]);
        } else {
            cplx c = terms_[i].coeff + rhs.terms_[j].coeff;
            if (c != cplx(0.0)) merged.push_back({terms_[i].mask, c});
            ++i; ++j;
        }
    }
    terms_ = std::move(merged);
    return *this;
}

GrassmannElement& GrassmannElement::operator-=(const GrassmannElement& rhs) {
    return *this += -rhs;
}

GrassmannElement& GrassmannElement::operator*=(cplx s) {
    if (s == cplx(0.0)) {
        terms_.clear();
    } else {
        for (Term& t : terms_) t.coeff *= s;
    }
    return *this;
}

void GrassmannElement::prune() {
    terms_.erase(std::remove_if(terms_.begin(), terms_.end(),
                                [](const Term& t) { return t.coeff == cplx(0.0); }),
                 terms_.end());
}

double max_coeff_distance(const GrassmannElement& a, const GrassmannElement& b) {
    check_same_algebra(a, b);
    double d = 0.0;
    std::size_t i = 0, j = 0;
    const auto& ta = a.terms_;
    const auto& tb = b.terms_;
    while (i < ta.size() || j < tb.size()) {
        if (j == tb.size() || (i < ta.size() && ta[i].mask < tb[j].mask)) {
            d = std::max(d, std::abs(ta[i++].coeff));
        } else if (i == ta.size() || tb[j].mask < ta[i].mask) {
            d = std::max(d, std::abs(tb[j++].coeff));
        } else {
            d = std::max(d, std::abs(ta[i].coeff - tb[j].coeff));
            ++i; ++j;
        }
    }
    return d;
}

// ===== products and derivatives =====

GrassmannElement wedge(const GrassmannElement& a, const GrassmannElement& b) {
    check_same_algebra(a, b);
    std::map<std::uint64_t, cplx> acc;
    for (const auto& ta : a.terms()) {
        for (const auto& tb : b.terms()) {
            if (ta.mask & tb.mask) continue;
            cplx c = ta.coeff * tb.coeff * double(merge_sign(ta.mask, tb.mask));
            acc[ta.mask | tb.mask] += c;
        }
    }
    GrassmannElement out(a.generators());
    out.terms_.reserve(acc.size());
    for (const auto& [mask, c] : acc)
        if (c != cplx(0.0)) out.terms_.push_back({mask, c});
    return out;
}

GrassmannElement derivative_left(const GrassmannElement& a, int j) {
    check_generator_index(a.generators(), j);
    const std::uint64_t bit = 1ULL << (j - 1);
    GrassmannElement out(a.generators());
    for (const auto& t : a.terms()) {
        if (!(t.mask & bit)) continue;
        int below = std::popcount(t.mask & below_mask(j - 1));
        cplx c = (below & 1) ? -t.coeff : t.coeff;
        out.terms_.push_back({t.mask ^ bit, c});
    }
    // masks keep their relative order when the same bit is cleared from each
    return out;
}

GrassmannElement derivative_right(const GrassmannElement& a, int j) {
    check_generator_index(a.generators(), j);
    const std::uint64_t bit = 1ULL << (j - 1);
    GrassmannElement out(a.generators());
    for (const auto& t : a.terms()) {
        if (!(t.mask & bit)) continue;
        int above = std::popcount(t.mask & above_mask(j - 1));
        cplx c = (above & 1) ? -t.coeff : t.coeff;
        out.terms_.push_back({t.mask ^ bit, c});
    }
    return out;
}

GrassmannElement berezin(const GrassmannElement& a, std::span<const int> order) {
    std::uint64_t seen = 0;
    for (int j : order) {
        check_generator_index(a.generators(), j);
        std::uint64_t bit = 1ULL << (j - 1);
        if (seen & bit) throw usage_error("berezin: repeated generator in measure");
        seen |= bit;
    }
    GrassmannElement out = a;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        out = derivative_left(out, *it);
    return out;
}

GrassmannElement berezin(const GrassmannElement& a, std::initializer_list<int> order) {
    return berezin(a, std::span<const int>(order.begin(), order.size()));
}

// ===== lifts =====

ScalarFunction exp_function() {
    return {std::numeric_limits<int>::max(),
            [](int, cplx x) { return std::exp(x); }};
}

ScalarFunction identity_function() {
    return {std::numeric_limits<int>::max(),
            [](int k, cplx x) { return k == 0 ? x : (k == 1 ? cplx(1.0) : cplx(0.0)); }};
}

GrassmannElement lift_function(const ScalarFunction& f, const GrassmannElement& a) {
    if (!a.is_even())
        throw usage_error("lift_function: argument must be even");
    if (!f.deriv)
        throw usage_error("lift_function: no evaluator supplied");
    const cplx b = a.body();
    GrassmannElement n = a.nilpotent_part();
    GrassmannElement out = GrassmannElement::scalar(a.generators(), f.deriv(0, b));
    GrassmannElement power = GrassmannElement::scalar(a.generators(), cplx(1.0));
    double factorial = 1.0;
    for (int k = 1; k <= 64; ++k) {
        power = wedge(power, n);
        if (power.is_zero()) return out;
        if (k > f.max_order)
            throw usage_error("lift_function: nilpotency order exceeds supplied derivatives");
        factorial *= double(k);
        out += power * (f.deriv(k, b) / factorial);
    }
    return out;
}

// ===== Gaussian Berezin integral =====

cplx grassmann_gaussian(const Eigen::MatrixXcd& M) {
    const int n = int(M.rows());
    if (M.cols() != n) throw usage_error("grassmann_gaussian: matrix must be square");
    if (n < 1 || n > 8) throw usage_error("grassmann_gaussian: supported sizes are 1 <= n <= 8");

    const int q = 2 * n;
    auto chi = [&](int j) { return GrassmannElement::generator(q, 2 * j - 1); };
    auto chibar = [&](int j) { return GrassmannElement::generator(q, 2 * j); };

    GrassmannElement S(q);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            S += M(i - 1, j - 1) * wedge(chibar(i), chi(j));

    GrassmannElement E = lift_function(exp_function(), -S);

    std::vector<int> order;
    order.reserve(std::size_t(q));
    for (int j = 1; j <= n; ++j) {
        order.push_back(2 * j);      // d chibar_j
        order.push_back(2 * j - 1);  // d chi_j
    }
    GrassmannElement r = berezin(E, std::span<const int>(order));
    if (!r.is_scalar())
        throw numeric_error("grassmann_gaussian: residual generators after full integration");
    return r.body();
}

// ===== supermatrices =====

SuperMatrix::SuperMatrix(int p, int q, int gens) : p_(p), fq_(q), gens_(gens) {
    if (p < 0 || q < 0 || p + q < 1) throw usage_error("SuperMatrix: bad block dims");
    entries_.assign(std::size_t(dim()) * dim(), GrassmannElement(gens));
}

GrassmannElement& SuperMatrix::at(int i, int j) {
    if (i < 0 || j < 0 || i >= dim() || j >= dim()) throw usage_error("SuperMatrix::at: out of range");
    return entries_[std::size_t(i) * dim() + j];
}

const GrassmannElement& SuperMatrix::at(int i, int j) const {
    if (i < 0 || j < 0 || i >= dim() || j >= dim()) throw usage_error("SuperMatrix::at: out of range");
    return entries_[std::size_t(i) * dim() + j];
}

bool SuperMatrix::has_valid_parity() const {
    for (int i = 0; i < dim(); ++i) {
        for (int j = 0; j < dim(); ++j) {
            bool even_slot = (i < p_) == (j < p_);
            const GrassmannElement& e = at(i, j);
            if (even_slot ? !e.is_even() : !e.is_odd()) return false;
        }
    }
    return true;
}

SuperMatrix supermatrix_product(const SuperMatrix& A, const SuperMatrix& B) {
    if (A.bose_dim() != B.bose_dim() || A.fermi_dim() != B.fermi_dim() ||
        A.generators() != B.generators())
        throw usage_error("supermatrix_product: shape mismatch");
    SuperMatrix C(A.bose_dim(), A.fermi_dim(), A.generators());
    for (int i = 0; i < A.dim(); ++i)
        for (int j = 0; j < A.dim(); ++j) {
            GrassmannElement s(A.generators());
            for (int k = 0; k < A.dim(); ++k)
                s += wedge(A.at(i, k), B.at(k, j));
            C.at(i, j) = s;
        }
    return C;
}

GrassmannElement even_inverse(const GrassmannElement& c) {
    if (!c.is_even()) throw usage_error("even_inverse: element must be even");
    const cplx b = c.body();
    if (std::abs(b) < 1e-300) throw numeric_error("even_inverse: body is (numerically) zero");
    GrassmannElement m = c.nilpotent_part() * (1.0 / b);
    GrassmannElement out = GrassmannElement::scalar(c.generators(), 1.0);
    GrassmannElement power = GrassmannElement::scalar(c.generators(), 1.0);
    double sign = 1.0;
    for (int k = 1; k <= 64; ++k) {
        power = wedge(power, m);
        if (power.is_zero()) break;
        sign = -sign;
        out += power * cplx(sign);
    }
    return out * (1.0 / b);
}

GrassmannElement even_matrix_determinant(const std::vector<GrassmannElement>& m, int n) {
    if (n < 1) throw usage_error("even_matrix_determinant: need n >= 1");
    const int gens = m[0].generators();
    if (int(m.size()) != n * n) throw usage_error("even_matrix_determinant: size mismatch");
    // Cofactor expansion over the first active row; entries are even so the
    // usual commutative formula applies.
    std::vector<int> cols;
    cols.resize(std::size_t(n));
    for (int j = 0; j < n; ++j) cols[std::size_t(j)] = j;

    std::function<GrassmannElement(int, std::vector<int>&)> det =
        [&](int row, std::vector<int>& active) -> GrassmannElement {
        if (active.size() == 1)
            return m[std::size_t(row) * n + active[0]];
        GrassmannElement s(gens);
        for (std::size_t t = 0; t < active.size(); ++t) {
            int col = active[t];
            std::vector<int> rest;
            rest.reserve(active.size() - 1);
            for (std::size_t u = 0; u < active.size(); ++u)
                if (u != t) rest.push_back(active[u]);
            GrassmannElement minor = det(row + 1, rest);
            GrassmannElement term = wedge(m[std::size_t(row) * n + col], minor);
            s += (t & 1) ? -term : term;
        }
        return s;
    };
    return det(0, cols);
}

GrassmannElement sdet(const SuperMatrix& M) {
    if (!M.has_valid_parity())
        throw usage_error("sdet: block parities violated");
    const int p = M.bose_dim(), q = M.fermi_dim(), gens = M.generators();
    if (q == 0) {
        std::vector<GrassmannElement> a(std::size_t(p) * p, GrassmannElement(gens));
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j) a[std::size_t(i) * p + j] = M.at(i, j);
        return even_matrix_determinant(a, p);
    }

    // Invert b = B + N around its body B via the finite Neumann series
    // b^{-1} = sum_k (-B^{-1} N)^k B^{-1}.
    Eigen::MatrixXcd B(q, q);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) B(i, j) = M.at(p + i, p + j).body();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(B);
    double absdet = std::abs(lu.determinant());
    if (!(absdet > 1e-300) || !std::isfinite(absdet))
        throw numeric_error("sdet: fermi-fermi block has singular body");
    Eigen::MatrixXcd Binv = lu.inverse();

    auto embed = [&](const Eigen::MatrixXcd& num) {
        std::vector<GrassmannElement> g(std::size_t(q) * q, GrassmannElement(gens));
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j)
                g[std::size_t(i) * q + j] = GrassmannElement::scalar(gens, num(i, j));
        return g;
    };
    auto gmul = [&](const std::vector<GrassmannElement>& x, const std::vector<GrassmannElement>& y,
                    int n) {
        std::vector<GrassmannElement> z(std::size_t(n) * n, GrassmannElement(gens));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                GrassmannElement s(gens);
                for (int k = 0; k < n; ++k)
                    s += wedge(x[std::size_t(i) * n + k], y[std::size_t(k) * n + j]);
                z[std::size_t(i) * n + j] = s;
            }
        return z;
    };
    auto all_zero = [](const std::vector<GrassmannElement>& x) {
        for (const auto& e : x)
            if (!e.is_zero()) return false;
        return true;
    };

    std::vector<GrassmannElement> binv = embed(Binv);
    std::vector<GrassmannElement> nilp(std::size_t(q) * q, GrassmannElement(gens));
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j)
            nilp[std::size_t(i) * q + j] = M.at(p + i, p + j).nilpotent_part();
    if (!all_zero(nilp)) {
        std::vector<GrassmannElement> step = gmul(embed(-Binv), nilp, q);  // -B^{-1} N
        std::vector<GrassmannElement> term = binv;
        for (int k = 1; k <= 65; ++k) {
            term = gmul(step, term, q);
            if (all_zero(term)) break;
            if (k == 65) throw numeric_error("sdet: Neumann series failed to terminate");
            for (std::size_t t = 0; t < binv.size(); ++t) binv[t] += term[t];
        }
    }

    // schur = a - sigma_block... rho: bose-fermi (p x q), sigma: fermi-bose (q x p)
    std::vector<GrassmannElement> schur(std::size_t(p) * p, GrassmannElement(gens));
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            GrassmannElement s = M.at(i, j);
            for (int k = 0; k < q; ++k) {
                GrassmannElement t(gens);
                for (int l = 0; l < q; ++l)
                    t += wedge(binv[std::size_t(k) * q + l], M.at(p + l, j));
                s -= wedge(M.at(i, p + k), t);
            }
            schur[std::size_t(i) * p + j] = s;
        }
    }

    std::vector<GrassmannElement> b(std::size_t(q) * q, GrassmannElement(gens));
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) b[std::size_t(i) * q + j] = M.at(p + i, p + j);

    GrassmannElement det_s = (p == 0) ? GrassmannElement::scalar(gens, 1.0)
                                      : even_matrix_determinant(schur, p);
    GrassmannElement det_b = even_matrix_determinant(b, q);
    return wedge(det_s, even_inverse(det_b));
}

}
