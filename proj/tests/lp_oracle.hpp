#pragma once

// Brute-force LP oracle shared by the solver tests and the acceptance run.

#include "adeqsim/lp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace lp_oracle
{

using namespace adeqsim::lp;

// Half-space a.x <= b.
struct HalfSpace
{
    std::vector<double> a;
    double b;
    bool equality;
};

inline bool
solve_square(std::vector<double>& m, std::vector<double>& rhs, std::vector<double>& x)
{
    const size_t n = rhs.size();
    for (size_t c = 0; c < n; ++c)
    {
        size_t p = c;
        for (size_t r = c + 1; r < n; ++r)
        {
            if (std::abs(m[r * n + c]) > std::abs(m[p * n + c]))
            {
                p = r;
            }
        }
        if (std::abs(m[p * n + c]) < 1e-10)
        {
            return false;
        }
        if (p != c)
        {
            for (size_t k = 0; k < n; ++k)
            {
                std::swap(m[p * n + k], m[c * n + k]);
            }
            std::swap(rhs[p], rhs[c]);
        }
        for (size_t r = c + 1; r < n; ++r)
        {
            const double f = m[r * n + c] / m[c * n + c];
            if (f == 0.0)
            {
                continue;
            }
            for (size_t k = c; k < n; ++k)
            {
                m[r * n + k] -= f * m[c * n + k];
            }
            rhs[r] -= f * rhs[c];
        }
    }
    x.assign(n, 0.0);
    for (size_t i = n; i-- > 0;)
    {
        double v = rhs[i];
        for (size_t k = i + 1; k < n; ++k)
        {
            v -= m[i * n + k] * x[k];
        }
        x[i] = v / m[i * n + i];
    }
    return true;
}

// Brute-force optimum over all vertices of a bounded polytope.
// Returns false when no vertex is feasible.
inline bool
vertex_optimum(const std::vector<HalfSpace>& hs, const std::vector<double>& c, double& best)
{
    const size_t n = c.size();
    std::vector<size_t> eq;
    std::vector<size_t> ineq;
    for (size_t i = 0; i < hs.size(); ++i)
    {
        (hs[i].equality ? eq : ineq).push_back(i);
    }
    if (eq.size() > n)
    {
        // Only generic instances are produced; treat as degenerate and skip.
        return false;
    }
    const size_t need = n - eq.size();
    bool found = false;
    best = 0.0;
    std::vector<bool> pick(ineq.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(need), true);
    std::vector<double> m;
    std::vector<double> rhs;
    std::vector<double> x;
    do
    {
        m.clear();
        rhs.clear();
        for (size_t i : eq)
        {
            m.insert(m.end(), hs[i].a.begin(), hs[i].a.end());
            rhs.push_back(hs[i].b);
        }
        for (size_t k = 0; k < ineq.size(); ++k)
        {
            if (pick[k])
            {
                m.insert(m.end(), hs[ineq[k]].a.begin(), hs[ineq[k]].a.end());
                rhs.push_back(hs[ineq[k]].b);
            }
        }
        if (!solve_square(m, rhs, x))
        {
            continue;
        }
        bool ok = true;
        for (const HalfSpace& h : hs)
        {
            double ax = 0.0;
            for (size_t j = 0; j < n; ++j)
            {
                ax += h.a[j] * x[j];
            }
            const double tol = 1e-7 * (1.0 + std::abs(h.b));
            if (ax > h.b + tol || (h.equality && ax < h.b - tol))
            {
                ok = false;
                break;
            }
        }
        if (!ok)
        {
            continue;
        }
        double z = 0.0;
        for (size_t j = 0; j < n; ++j)
        {
            z += c[j] * x[j];
        }
        if (!found || z < best)
        {
            best = z;
            found = true;
        }
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return found;
}

inline double
binomial(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i)
    {
        r = r * (n - k + i) / i;
    }
    return r;
}

struct RandomLp
{
    LpProblem lp;
    std::vector<HalfSpace> hs;
    std::vector<double> c;
};

inline RandomLp
random_lp(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> nd(2, 10);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RandomLp r;
    const int n = nd(rng);
    int m = std::uniform_int_distribution<int>(1, 8)(rng);
    while (m > 1 && binomial(2 * m + 2 * n, n) > 1e6)
    {
        --m;
    }
    for (int j = 0; j < n; ++j)
    {
        const double lo = std::round(u(rng) * 5.0);
        const double hi = lo + 1.0 + std::round((u(rng) + 1.0) * 5.0);
        const double cost = std::round(u(rng) * 10.0);
        r.lp.add_variable(lo, hi, cost);
        r.c.push_back(cost);
        std::vector<double> e(n, 0.0);
        e[j] = 1.0;
        r.hs.push_back({e, hi, false});
        e[j] = -1.0;
        r.hs.push_back({e, -lo, false});
    }
    for (int i = 0; i < m; ++i)
    {
        std::vector<Term> terms;
        std::vector<double> a(n, 0.0);
        for (int j = 0; j < n; ++j)
        {
            a[j] = std::round(u(rng) * 8.0) / 2.0;
            if (a[j] != 0.0)
            {
                terms.push_back({j, a[j]});
            }
        }
        const double center = std::round(u(rng) * 10.0);
        const int kind = std::uniform_int_distribution<int>(0, 3)(rng);
        std::vector<double> neg(a);
        for (double& v : neg)
        {
            v = -v;
        }
        if (kind == 0)
        {
            r.lp.add_le(terms, center);
            r.hs.push_back({a, center, false});
        }
        else if (kind == 1)
        {
            r.lp.add_ge(terms, center);
            r.hs.push_back({neg, -center, false});
        }
        else if (kind == 2 && i == 0)
        {
            r.lp.add_eq(terms, center);
            r.hs.push_back({a, center, true});
        }
        else
        {
            const double width = 1.0 + std::round((u(rng) + 1.0) * 3.0);
            r.lp.add_row(terms, center - width, center + width);
            r.hs.push_back({a, center + width, false});
            r.hs.push_back({neg, -(center - width), false});
        }
    }
    return r;
}


} // namespace lp_oracle
