#include "cslab/relations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cslab/errors.hpp"

namespace cslab {
namespace {

using i128 = __int128;

bool row_is_zero(const IntRow& r) {
    for (long long c : r)
        if (c != 0) return false;
    return true;
}

// a -= q * b, with overflow detection on the int64 entries
void submul(IntRow& a, const IntRow& b, long long q) {
    constexpr i128 lo = std::numeric_limits<long long>::min();
    constexpr i128 hi = std::numeric_limits<long long>::max();
    for (size_t k = 0; k < a.size(); ++k) {
        i128 val = static_cast<i128>(a[k]) - static_cast<i128>(q) * static_cast<i128>(b[k]);
        if (val < lo || val > hi) throw InvalidState("lll_reduce: coefficient overflow");
        a[k] = static_cast<long long>(val);
    }
}

struct Gs {
    std::vector<std::vector<long double>> mu; // mu[i][j] for j < i
    std::vector<long double> B;               // squared norms of the b*_i
};

// Full Gram-Schmidt pass in extended precision; the basis itself stays exact.
void compute_gs(const IntMatrix& basis, Gs& gs) {
    const size_t m = basis.size();
    const size_t dim = basis[0].size();
    std::vector<std::vector<long double>> bs(m, std::vector<long double>(dim));
    gs.mu.assign(m, {});
    gs.B.assign(m, 0.0L);
    for (size_t i = 0; i < m; ++i) {
        for (size_t k = 0; k < dim; ++k) bs[i][k] = static_cast<long double>(basis[i][k]);
        gs.mu[i].assign(i, 0.0L);
        for (size_t j = 0; j < i; ++j) {
            long double num = 0.0L;
            for (size_t k = 0; k < dim; ++k)
                num += static_cast<long double>(basis[i][k]) * bs[j][k];
            long double mu = gs.B[j] > 0.0L ? num / gs.B[j] : 0.0L;
            gs.mu[i][j] = mu;
            for (size_t k = 0; k < dim; ++k) bs[i][k] -= mu * bs[j][k];
        }
        long double nb = 0.0L;
        for (size_t k = 0; k < dim; ++k) nb += bs[i][k] * bs[i][k];
        gs.B[i] = nb;
    }
}

} // namespace

IntMatrix lll_reduce(IntMatrix basis, double delta) {
    if (!(delta > 0.25 && delta < 1.0))
        throw InvalidState("lll_reduce: delta must be in (1/4, 1)");
    if (basis.empty()) return basis;
    const size_t dim = basis[0].size();
    for (const auto& row : basis) {
        if (row.size() != dim) throw InvalidState("lll_reduce: ragged matrix");
        if (row_is_zero(row)) throw InvalidState("lll_reduce: dependent rows");
    }
    const size_t m = basis.size();
    if (m == 1) return basis;

    Gs gs;
    size_t k = 1;
    long iters = 0;
    while (k < m) {
        if (++iters > 500000) throw InvalidState("lll_reduce: iteration cap exceeded");
        compute_gs(basis, gs);
        // size-reduce row k; the orthogonalization is unchanged, only mu moves
        for (size_t j = k; j-- > 0;) {
            if (std::fabs(static_cast<double>(gs.mu[k][j])) > 0.5) {
                long long q = llroundl(gs.mu[k][j]);
                submul(basis[k], basis[j], q);
                for (size_t l = 0; l < j; ++l)
                    gs.mu[k][l] -= static_cast<long double>(q) * gs.mu[j][l];
                gs.mu[k][j] -= static_cast<long double>(q);
            }
        }
        if (row_is_zero(basis[k])) throw InvalidState("lll_reduce: dependent rows");
        long double mu = gs.mu[k][k - 1];
        if (gs.B[k] >= (static_cast<long double>(delta) - mu * mu) * gs.B[k - 1]) {
            ++k;
        } else {
            std::swap(basis[k], basis[k - 1]);
            k = (k > 1) ? k - 1 : 1;
        }
    }
    return basis;
}

namespace {

double residual_of(const IntRow& q, const std::vector<double>& v) {
    double s = 0.0;
    for (size_t i = 0; i < v.size(); ++i) s += static_cast<double>(q[i]) * v[i];
    return std::fabs(s);
}

long long max_abs_coeff(const IntRow& q) {
    long long m = 0;
    for (long long c : q) m = std::max(m, std::llabs(c));
    return m;
}

void sign_normalize(IntRow& q) {
    for (long long c : q) {
        if (c > 0) return;
        if (c < 0) {
            for (auto& e : q) e = -e;
            return;
        }
    }
}

// true if a beats b under (residual, max coeff, lexicographic)
bool better_candidate(const IntRow& a, double ra, const IntRow& b, double rb) {
    if (ra != rb) return ra < rb;
    long long ma = max_abs_coeff(a), mb = max_abs_coeff(b);
    if (ma != mb) return ma < mb;
    return a < b;
}

} // namespace

RelationResult integer_relation(const RelationQuery& query) {
    const auto& v = query.v;
    const int d = static_cast<int>(v.size());
    if (d < 1) throw InvalidState("integer_relation: empty query");
    if (!(query.tol > 0.0)) throw InvalidState("integer_relation: tol must be > 0");
    if (query.bound < 1) throw InvalidState("integer_relation: bound must be >= 1");
    for (double c : v)
        if (!std::isfinite(c)) throw InvalidState("integer_relation: non-finite input");

    // Default scale: 10/tol would let near-relations at the coefficient bound
    // outshine an exact relation in the reduced basis, so widen it with the
    // search box. The minimum gamma >= 1/tol is always respected.
    double gamma = query.scale;
    if (gamma <= 0.0)
        gamma = (10.0 / query.tol) * std::max(1.0, static_cast<double>(d) *
                                                       static_cast<double>(query.bound));
    if (gamma < 1.0 / query.tol) throw InvalidState("integer_relation: scale below 1/tol");
    for (double c : v)
        if (std::fabs(gamma * c) > 9.0e18)
            throw InvalidState("integer_relation: embedding overflows 64-bit range");

    IntMatrix basis(d, IntRow(d + 1, 0));
    for (int i = 0; i < d; ++i) {
        basis[i][static_cast<size_t>(i)] = 1;
        basis[i][static_cast<size_t>(d)] = llround(gamma * v[static_cast<size_t>(i)]);
    }
    IntMatrix red = lll_reduce(std::move(basis), 0.99);

    // Scan the reduced rows plus small integer combinations of them.
    IntRow best;
    double best_residual = 0.0;
    auto consider = [&](const IntRow& cand) {
        IntRow q(cand.begin(), cand.begin() + d);
        if (row_is_zero(q)) return;
        if (max_abs_coeff(q) > query.bound) return;
        double r = residual_of(q, v);
        if (r > query.tol) return;
        sign_normalize(q);
        if (best.empty() || better_candidate(q, r, best, best_residual)) {
            best = q;
            best_residual = r;
        }
    };
    for (const auto& row : red) consider(row);
    if (d <= 8) {
        // all combinations with coefficients in {-1, 0, 1}
        IntRow acc(static_cast<size_t>(d) + 1, 0);
        std::vector<int> c(static_cast<size_t>(d), -1);
        while (true) {
            std::fill(acc.begin(), acc.end(), 0);
            for (int i = 0; i < d; ++i)
                if (c[static_cast<size_t>(i)] != 0)
                    for (int k = 0; k <= d; ++k)
                        acc[static_cast<size_t>(k)] +=
                            c[static_cast<size_t>(i)] * red[static_cast<size_t>(i)][static_cast<size_t>(k)];
            consider(acc);
            int pos = 0;
            while (pos < d && c[static_cast<size_t>(pos)] == 1) {
                c[static_cast<size_t>(pos)] = -1;
                ++pos;
            }
            if (pos == d) break;
            ++c[static_cast<size_t>(pos)];
        }
    } else {
        IntRow acc(static_cast<size_t>(d) + 1, 0);
        for (size_t i = 0; i < red.size(); ++i)
            for (size_t j = i + 1; j < red.size(); ++j)
                for (int sgn : {1, -1}) {
                    for (int k = 0; k <= d; ++k)
                        acc[static_cast<size_t>(k)] = red[i][static_cast<size_t>(k)] +
                                                      sgn * red[j][static_cast<size_t>(k)];
                    consider(acc);
                }
    }

    RelationResult res;
    if (!best.empty()) {
        res.found = true;
        res.q = best;
        res.residual = best_residual;
        // soundness re-check
        if (row_is_zero(res.q) || max_abs_coeff(res.q) > query.bound ||
            residual_of(res.q, v) > query.tol)
            throw InvalidState("integer_relation: internal soundness check failed");
        return res;
    }

    // No relation at (tol, bound). Certify the coefficient range excluded by
    // the reduction: any relation with max|q_i| <= B yields a lattice vector of
    // norm^2 <= d B^2 + (gamma tol + d B / 2)^2 <= (d + d^2/2) B^2 + 2 (gamma tol)^2,
    // while lambda_1 >= |b_1| / 2^{(m-1)/2}.
    long double b1 = 0.0L;
    for (long long c : red[0]) b1 += static_cast<long double>(c) * static_cast<long double>(c);
    long double lam2 = b1 / powl(2.0L, static_cast<long double>(d - 1));
    long double gt = static_cast<long double>(gamma) * static_cast<long double>(query.tol);
    long double num = lam2 - 2.0L * gt * gt;
    long double den = static_cast<long double>(d) + 0.5L * static_cast<long double>(d) * d;
    res.certified_bound = num > 0.0L ? static_cast<double>(sqrtl(num / den)) : 0.0;
    return res;
}

int kronecker_dimension(std::vector<double> v, double tol, long long bound) {
    if (v.size() > 16) throw InvalidState("kronecker_dimension: d must be <= 16");
    while (!v.empty()) {
        RelationResult res = integer_relation({v, tol, bound, 0.0});
        if (!res.found) break;
        size_t pivot = 0;
        for (size_t i = 1; i < res.q.size(); ++i)
            if (std::llabs(res.q[i]) > std::llabs(res.q[pivot])) pivot = i;
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(pivot));
    }
    return static_cast<int>(v.size());
}

} // namespace cslab
