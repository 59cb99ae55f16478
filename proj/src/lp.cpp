#include "adeqsim/lp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace adeqsim::lp
{

int
LpProblem::add_variable(double lower, double upper, double cost, std::string name)
{
    lower_.push_back(lower);
    upper_.push_back(upper);
    cost_.push_back(cost);
    names_.push_back(std::move(name));
    return static_cast<int>(cost_.size()) - 1;
}

int
LpProblem::add_row(std::vector<Term> terms, double lower, double upper, std::string name)
{
    for (const Term& t : terms)
    {
        if (t.var < 0 || t.var >= num_variables())
        {
            throw std::out_of_range("LpProblem::add_row: unknown variable index");
        }
    }
    // Repeated variables are summed into one term, first occurrence order kept.
    std::vector<Term> merged;
    merged.reserve(terms.size());
    for (const Term& t : terms)
    {
        auto it = std::find_if(merged.begin(), merged.end(), [&](const Term& m) { return m.var == t.var; });
        if (it == merged.end())
        {
            merged.push_back(t);
        }
        else
        {
            it->coef += t.coef;
        }
    }
    terms = std::move(merged);
    rows_.push_back(Row{std::move(terms), lower, upper, std::move(name)});
    return static_cast<int>(rows_.size()) - 1;
}

void
LpProblem::set_bounds(int var, double lower, double upper)
{
    lower_.at(var) = lower;
    upper_.at(var) = upper;
}

double
LpProblem::objective(const std::vector<double>& x) const
{
    double z = 0.0;
    for (int j = 0; j < num_variables(); ++j)
    {
        z += cost_[j] * x[j];
    }
    return z;
}

double
LpProblem::max_violation(const std::vector<double>& x) const
{
    double worst = 0.0;
    for (int j = 0; j < num_variables(); ++j)
    {
        worst = std::max({worst, lower_[j] - x[j], x[j] - upper_[j]});
    }
    for (const Row& r : rows_)
    {
        double ax = 0.0;
        for (const Term& t : r.terms)
        {
            ax += t.coef * x[t.var];
        }
        worst = std::max({worst, r.lower - ax, ax - r.upper});
    }
    return worst;
}

const char*
to_string(LpStatus status)
{
    switch (status)
    {
        case LpStatus::kOptimal: return "optimal";
        case LpStatus::kInfeasible: return "infeasible";
        case LpStatus::kUnbounded: return "unbounded";
        case LpStatus::kIterationLimit: return "iteration_limit";
    }
    return "unknown";
}

namespace
{

double
pow2_scale(double max_abs)
{
    if (max_abs <= 0.0 || !std::isfinite(max_abs))
    {
        return 1.0;
    }
    // Powers of two keep scaling exact in floating point.
    return std::exp2(-std::round(std::log2(max_abs)));
}

struct Entry
{
    int row;
    double value;
};

enum class NbState
{
    kBasic,
    kLower,
    kUpper,
    kZero,
};

// Internal form: A x - s + diag(sigma) a = 0 with slack bounds equal to the
// row range and artificials a >= 0 used only in phase one.
class Simplex
{
  public:
    Simplex(const LpProblem& p, const SolverOptions& opt)
        : opt_(opt), m_(p.num_rows()), n_(p.num_variables())
    {
        row_scale_.assign(m_, 1.0);
        col_scale_.assign(n_, 1.0);
        if (opt.scale)
        {
            for (int i = 0; i < m_; ++i)
            {
                double mx = 0.0;
                for (const Term& t : p.row(i).terms)
                {
                    mx = std::max(mx, std::abs(t.coef));
                }
                row_scale_[i] = pow2_scale(mx);
            }
            std::vector<double> colmax(n_, 0.0);
            for (int i = 0; i < m_; ++i)
            {
                for (const Term& t : p.row(i).terms)
                {
                    colmax[t.var] = std::max(colmax[t.var], std::abs(t.coef * row_scale_[i]));
                }
            }
            for (int j = 0; j < n_; ++j)
            {
                col_scale_[j] = pow2_scale(colmax[j]);
            }
        }

        total_ = n_ + 2 * m_;
        cols_.assign(total_, {});
        lo_.assign(total_, 0.0);
        up_.assign(total_, 0.0);
        cost2_.assign(total_, 0.0);
        x_.assign(total_, 0.0);
        state_.assign(total_, NbState::kLower);
        pos_.assign(total_, -1);

        for (int i = 0; i < m_; ++i)
        {
            for (const Term& t : p.row(i).terms)
            {
                if (t.coef != 0.0)
                {
                    cols_[t.var].push_back({i, t.coef * row_scale_[i] * col_scale_[t.var]});
                }
            }
        }
        for (int j = 0; j < n_; ++j)
        {
            // x = col_scale * x'
            lo_[j] = p.lower(j) / col_scale_[j];
            up_[j] = p.upper(j) / col_scale_[j];
            cost2_[j] = p.cost(j) * col_scale_[j];
        }
        for (int i = 0; i < m_; ++i)
        {
            const int s = n_ + i;
            cols_[s].push_back({i, -1.0});
            lo_[s] = p.row(i).lower * row_scale_[i];
            up_[s] = p.row(i).upper * row_scale_[i];
            const int a = n_ + m_ + i;
            cols_[a].push_back({i, 1.0});
            lo_[a] = 0.0;
            up_[a] = 0.0;
        }
    }

    LpSolution run(const LpProblem& p)
    {
        LpSolution sol;
        for (int j = 0; j < n_ + m_; ++j)
        {
            if (lo_[j] > up_[j])
            {
                sol.status = LpStatus::kInfeasible;
                return sol;
            }
        }

        initial_basis();

        // Phase one: drive artificials to zero.
        std::vector<double> cost1(total_, 0.0);
        for (int i = 0; i < m_; ++i)
        {
            cost1[n_ + m_ + i] = 1.0;
        }
        LpStatus st = iterate(cost1);
        if (st == LpStatus::kIterationLimit)
        {
            sol.status = st;
            sol.iterations = iterations_;
            return sol;
        }
        double infeas = 0.0;
        for (int i = 0; i < m_; ++i)
        {
            infeas += x_[n_ + m_ + i];
        }
        if (infeas > 1e-7)
        {
            sol.status = LpStatus::kInfeasible;
            sol.iterations = iterations_;
            return sol;
        }
        expel_artificials();

        st = iterate(cost2_);
        sol.iterations = iterations_;
        if (st != LpStatus::kOptimal)
        {
            sol.status = st;
            return sol;
        }

        std::vector<double> y = btran(cost2_);
        sol.status = LpStatus::kOptimal;
        sol.x.resize(n_);
        sol.reduced_costs.resize(n_);
        for (int j = 0; j < n_; ++j)
        {
            sol.x[j] = x_[j] * col_scale_[j];
            double d = cost2_[j] - dot(y, j);
            sol.reduced_costs[j] = state_[j] == NbState::kBasic ? 0.0 : d / col_scale_[j];
        }
        sol.row_duals.resize(m_);
        for (int i = 0; i < m_; ++i)
        {
            sol.row_duals[i] = y[i] * row_scale_[i];
        }
        sol.objective = p.objective(sol.x);
        return sol;
    }

  private:
    double dot(const std::vector<double>& y, int j) const
    {
        double s = 0.0;
        for (const Entry& e : cols_[j])
        {
            s += y[e.row] * e.value;
        }
        return s;
    }

    void initial_basis()
    {
        for (int j = 0; j < n_; ++j)
        {
            if (std::isfinite(lo_[j]))
            {
                x_[j] = lo_[j];
                state_[j] = NbState::kLower;
            }
            else if (std::isfinite(up_[j]))
            {
                x_[j] = up_[j];
                state_[j] = NbState::kUpper;
            }
            else
            {
                x_[j] = 0.0;
                state_[j] = NbState::kZero;
            }
        }
        std::vector<double> ax(m_, 0.0);
        for (int j = 0; j < n_; ++j)
        {
            if (x_[j] != 0.0)
            {
                for (const Entry& e : cols_[j])
                {
                    ax[e.row] += e.value * x_[j];
                }
            }
        }
        head_.assign(m_, -1);
        binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i)
        {
            const int s = n_ + i;
            const int a = n_ + m_ + i;
            if (ax[i] >= lo_[s] - opt_.feasibility_tol && ax[i] <= up_[s] + opt_.feasibility_tol)
            {
                basic(s, i);
                x_[s] = ax[i];
                state_[a] = NbState::kLower;
                x_[a] = 0.0;
                binv_[static_cast<size_t>(i) * m_ + i] = -1.0;
            }
            else
            {
                const bool below = ax[i] < lo_[s];
                const double bound = below ? lo_[s] : up_[s];
                state_[s] = below ? NbState::kLower : NbState::kUpper;
                x_[s] = bound;
                // ax - bound + sigma * a = 0
                const double sigma = bound - ax[i] >= 0.0 ? 1.0 : -1.0;
                cols_[a][0].value = sigma;
                up_[a] = kInf;
                basic(a, i);
                x_[a] = std::abs(bound - ax[i]);
                binv_[static_cast<size_t>(i) * m_ + i] = sigma;
            }
        }
    }

    void basic(int var, int position)
    {
        head_[position] = var;
        pos_[var] = position;
        state_[var] = NbState::kBasic;
    }

    std::vector<double> btran(const std::vector<double>& cost) const
    {
        std::vector<double> y(m_, 0.0);
        for (int k = 0; k < m_; ++k)
        {
            const double cb = cost[head_[k]];
            if (cb == 0.0)
            {
                continue;
            }
            const double* row = &binv_[static_cast<size_t>(k) * m_];
            for (int i = 0; i < m_; ++i)
            {
                y[i] += cb * row[i];
            }
        }
        return y;
    }

    std::vector<double> ftran(int j) const
    {
        std::vector<double> alpha(m_, 0.0);
        for (const Entry& e : cols_[j])
        {
            for (int k = 0; k < m_; ++k)
            {
                alpha[k] += binv_[static_cast<size_t>(k) * m_ + e.row] * e.value;
            }
        }
        return alpha;
    }

    bool refactor()
    {
        // Gauss-Jordan on [B | I].
        std::vector<double> b(static_cast<size_t>(m_) * m_, 0.0);
        for (int k = 0; k < m_; ++k)
        {
            for (const Entry& e : cols_[head_[k]])
            {
                b[static_cast<size_t>(e.row) * m_ + k] = e.value;
            }
        }
        std::vector<double> inv(static_cast<size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i)
        {
            inv[static_cast<size_t>(i) * m_ + i] = 1.0;
        }
        for (int c = 0; c < m_; ++c)
        {
            int piv = c;
            double best = std::abs(b[static_cast<size_t>(c) * m_ + c]);
            for (int r = c + 1; r < m_; ++r)
            {
                const double v = std::abs(b[static_cast<size_t>(r) * m_ + c]);
                if (v > best)
                {
                    best = v;
                    piv = r;
                }
            }
            if (best < 1e-14)
            {
                return false;
            }
            if (piv != c)
            {
                for (int k = 0; k < m_; ++k)
                {
                    std::swap(b[static_cast<size_t>(piv) * m_ + k], b[static_cast<size_t>(c) * m_ + k]);
                    std::swap(inv[static_cast<size_t>(piv) * m_ + k], inv[static_cast<size_t>(c) * m_ + k]);
                }
            }
            const double d = b[static_cast<size_t>(c) * m_ + c];
            for (int k = 0; k < m_; ++k)
            {
                b[static_cast<size_t>(c) * m_ + k] /= d;
                inv[static_cast<size_t>(c) * m_ + k] /= d;
            }
            for (int r = 0; r < m_; ++r)
            {
                if (r == c)
                {
                    continue;
                }
                const double f = b[static_cast<size_t>(r) * m_ + c];
                if (f == 0.0)
                {
                    continue;
                }
                for (int k = 0; k < m_; ++k)
                {
                    b[static_cast<size_t>(r) * m_ + k] -= f * b[static_cast<size_t>(c) * m_ + k];
                    inv[static_cast<size_t>(r) * m_ + k] -= f * inv[static_cast<size_t>(c) * m_ + k];
                }
            }
        }
        // Row k of B^{-1} corresponds to basis position k.
        binv_ = std::move(inv);
        recompute_basic_values();
        return true;
    }

    void recompute_basic_values()
    {
        std::vector<double> rhs(m_, 0.0);
        for (int j = 0; j < total_; ++j)
        {
            if (state_[j] == NbState::kBasic || x_[j] == 0.0)
            {
                continue;
            }
            for (const Entry& e : cols_[j])
            {
                rhs[e.row] -= e.value * x_[j];
            }
        }
        for (int k = 0; k < m_; ++k)
        {
            double v = 0.0;
            const double* row = &binv_[static_cast<size_t>(k) * m_];
            for (int i = 0; i < m_; ++i)
            {
                v += row[i] * rhs[i];
            }
            x_[head_[k]] = v;
        }
    }

    void pivot(int entering, int position, const std::vector<double>& alpha)
    {
        const double pr = alpha[position];
        double* prow = &binv_[static_cast<size_t>(position) * m_];
        for (int i = 0; i < m_; ++i)
        {
            prow[i] /= pr;
        }
        for (int k = 0; k < m_; ++k)
        {
            if (k == position || alpha[k] == 0.0)
            {
                continue;
            }
            const double f = alpha[k];
            double* row = &binv_[static_cast<size_t>(k) * m_];
            for (int i = 0; i < m_; ++i)
            {
                row[i] -= f * prow[i];
            }
        }
        pos_[head_[position]] = -1;
        basic(entering, position);
    }

    LpStatus iterate(const std::vector<double>& cost)
    {
        int since_refactor = 0;
        while (true)
        {
            if (iterations_ >= opt_.max_iterations)
            {
                return LpStatus::kIterationLimit;
            }
            if (since_refactor >= opt_.refactor_interval)
            {
                refactor();
                since_refactor = 0;
            }
            const std::vector<double> y = btran(cost);

            // Bland: lowest-index improving column.
            int entering = -1;
            double dir = 0.0;
            for (int j = 0; j < total_; ++j)
            {
                const NbState s = state_[j];
                if (s == NbState::kBasic || lo_[j] == up_[j])
                {
                    continue;
                }
                const double d = cost[j] - dot(y, j);
                if (s == NbState::kLower && d < -opt_.optimality_tol)
                {
                    dir = 1.0;
                }
                else if (s == NbState::kUpper && d > opt_.optimality_tol)
                {
                    dir = -1.0;
                }
                else if (s == NbState::kZero && std::abs(d) > opt_.optimality_tol)
                {
                    dir = d < 0.0 ? 1.0 : -1.0;
                }
                else
                {
                    continue;
                }
                entering = j;
                break;
            }
            if (entering < 0)
            {
                return LpStatus::kOptimal;
            }

            const std::vector<double> alpha = ftran(entering);
            // x_B(t) = x_B - dir * t * alpha
            double tmin = kInf;
            for (int k = 0; k < m_; ++k)
            {
                const double rate = -dir * alpha[k];
                if (std::abs(alpha[k]) <= opt_.pivot_tol)
                {
                    continue;
                }
                const int v = head_[k];
                double t = kInf;
                if (rate < 0.0 && std::isfinite(lo_[v]))
                {
                    t = (x_[v] - lo_[v]) / -rate;
                }
                else if (rate > 0.0 && std::isfinite(up_[v]))
                {
                    t = (up_[v] - x_[v]) / rate;
                }
                tmin = std::min(tmin, std::max(t, 0.0));
            }
            const double span = up_[entering] - lo_[entering];
            const bool can_flip = std::isfinite(span);
            if (!std::isfinite(tmin) && !can_flip)
            {
                return LpStatus::kUnbounded;
            }

            ++iterations_;
            ++since_refactor;
            if (can_flip && span <= tmin)
            {
                const double t = span;
                for (int k = 0; k < m_; ++k)
                {
                    x_[head_[k]] -= dir * t * alpha[k];
                }
                x_[entering] += dir * t;
                if (dir > 0.0)
                {
                    x_[entering] = up_[entering];
                    state_[entering] = NbState::kUpper;
                }
                else
                {
                    x_[entering] = lo_[entering];
                    state_[entering] = NbState::kLower;
                }
                continue;
            }

            // Ties broken by the lowest variable index.
            const double tie = tmin + 1e-12 * (1.0 + tmin);
            int leave_pos = -1;
            for (int k = 0; k < m_; ++k)
            {
                if (std::abs(alpha[k]) <= opt_.pivot_tol)
                {
                    continue;
                }
                const double rate = -dir * alpha[k];
                const int v = head_[k];
                double t = kInf;
                if (rate < 0.0 && std::isfinite(lo_[v]))
                {
                    t = (x_[v] - lo_[v]) / -rate;
                }
                else if (rate > 0.0 && std::isfinite(up_[v]))
                {
                    t = (up_[v] - x_[v]) / rate;
                }
                t = std::max(t, 0.0);
                if (t <= tie && (leave_pos < 0 || v < head_[leave_pos]))
                {
                    leave_pos = k;
                }
            }

            const double t = tmin;
            for (int k = 0; k < m_; ++k)
            {
                x_[head_[k]] -= dir * t * alpha[k];
            }
            x_[entering] += dir * t;

            const int leaving = head_[leave_pos];
            const double rate = -dir * alpha[leave_pos];
            if (rate < 0.0)
            {
                x_[leaving] = lo_[leaving];
                state_[leaving] = NbState::kLower;
            }
            else
            {
                x_[leaving] = up_[leaving];
                state_[leaving] = NbState::kUpper;
            }
            if (std::isinf(lo_[leaving]) && std::isinf(up_[leaving]))
            {
                state_[leaving] = NbState::kZero;
            }
            pivot(entering, leave_pos, alpha);
        }
    }

    void expel_artificials()
    {
        for (int k = 0; k < m_; ++k)
        {
            const int v = head_[k];
            if (v < n_ + m_)
            {
                continue;
            }
            const double* row = &binv_[static_cast<size_t>(k) * m_];
            for (int j = 0; j < n_ + m_; ++j)
            {
                if (state_[j] == NbState::kBasic)
                {
                    continue;
                }
                double a = 0.0;
                for (const Entry& e : cols_[j])
                {
                    a += row[e.row] * e.value;
                }
                if (std::abs(a) > 1e-7)
                {
                    std::vector<double> alpha = ftran(j);
                    x_[v] = 0.0;
                    state_[v] = NbState::kLower;
                    pivot(j, k, alpha);
                    break;
                }
            }
        }
        for (int i = 0; i < m_; ++i)
        {
            const int a = n_ + m_ + i;
            up_[a] = 0.0;
            if (state_[a] != NbState::kBasic)
            {
                x_[a] = 0.0;
                state_[a] = NbState::kLower;
            }
        }
        refactor();
    }

    SolverOptions opt_;
    int m_;
    int n_;
    int total_ = 0;
    int iterations_ = 0;
    std::vector<double> row_scale_;
    std::vector<double> col_scale_;
    std::vector<std::vector<Entry>> cols_;
    std::vector<double> lo_;
    std::vector<double> up_;
    std::vector<double> cost2_;
    std::vector<double> x_;
    std::vector<NbState> state_;
    std::vector<int> pos_;
    std::vector<int> head_;
    std::vector<double> binv_;
};

} // namespace

LpSolution
solve_lp(const LpProblem& problem, const SolverOptions& options)
{
    if (problem.num_rows() == 0)
    {
        // Pure bound problem: each variable sits at its cheaper bound.
        LpSolution sol;
        sol.status = LpStatus::kOptimal;
        sol.x.resize(problem.num_variables());
        sol.reduced_costs.resize(problem.num_variables());
        for (int j = 0; j < problem.num_variables(); ++j)
        {
            const double c = problem.cost(j);
            const double lo = problem.lower(j);
            const double up = problem.upper(j);
            if (lo > up)
            {
                sol.status = LpStatus::kInfeasible;
                return sol;
            }
            double v = std::isfinite(lo) ? lo : (std::isfinite(up) ? up : 0.0);
            if (c > 0.0)
            {
                if (!std::isfinite(lo))
                {
                    sol.status = LpStatus::kUnbounded;
                    return sol;
                }
                v = lo;
            }
            else if (c < 0.0)
            {
                if (!std::isfinite(up))
                {
                    sol.status = LpStatus::kUnbounded;
                    return sol;
                }
                v = up;
            }
            sol.x[j] = v;
            sol.reduced_costs[j] = c;
        }
        sol.objective = problem.objective(sol.x);
        return sol;
    }
    Simplex simplex(problem, options);
    return simplex.run(problem);
}

void
dump_lp(const LpProblem& problem, std::ostream& out)
{
    auto fmt = [&](double v) {
        if (std::isinf(v))
        {
            out << (v > 0 ? "+inf" : "-inf");
        }
        else
        {
            out << std::setprecision(10) << v;
        }
    };
    out << "MIN";
    for (int j = 0; j < problem.num_variables(); ++j)
    {
        if (problem.cost(j) != 0.0)
        {
            out << ' ';
            fmt(problem.cost(j));
            out << "*x" << j;
        }
    }
    out << '\n';
    for (int i = 0; i < problem.num_rows(); ++i)
    {
        const Row& r = problem.row(i);
        out << "R" << i << ' ';
        fmt(r.lower);
        out << " <=";
        for (const Term& t : r.terms)
        {
            out << ' ';
            fmt(t.coef);
            out << "*x" << t.var;
        }
        out << " <= ";
        fmt(r.upper);
        out << '\n';
    }
    for (int j = 0; j < problem.num_variables(); ++j)
    {
        out << "B x" << j << ' ';
        fmt(problem.lower(j));
        out << ' ';
        fmt(problem.upper(j));
        if (!problem.name(j).empty())
        {
            out << ' ' << problem.name(j);
        }
        out << '\n';
    }
}

} // namespace adeqsim::lp
