#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace adeqsim::lp
{

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term
{
    int var;
    double coef;
};

/// A linear row `lower <= sum(coef * x[var]) <= upper`. Equality rows use
/// `lower == upper`; one-sided rows leave the other side infinite.
struct Row
{
    std::vector<Term> terms;
    double lower;
    double upper;
    std::string name;
};

/// Minimization LP over bounded variables and ranged rows.
class LpProblem
{
  public:
    int add_variable(double lower, double upper, double cost, std::string name = {});
    int add_row(std::vector<Term> terms, double lower, double upper, std::string name = {});
    int add_le(std::vector<Term> terms, double rhs, std::string name = {})
    {
        return add_row(std::move(terms), -kInf, rhs, std::move(name));
    }
    int add_ge(std::vector<Term> terms, double rhs, std::string name = {})
    {
        return add_row(std::move(terms), rhs, kInf, std::move(name));
    }
    int add_eq(std::vector<Term> terms, double rhs, std::string name = {})
    {
        return add_row(std::move(terms), rhs, rhs, std::move(name));
    }

    void set_cost(int var, double cost) { cost_.at(var) = cost; }
    void set_bounds(int var, double lower, double upper);

    int num_variables() const { return static_cast<int>(cost_.size()); }
    int num_rows() const { return static_cast<int>(rows_.size()); }

    double lower(int var) const { return lower_[var]; }
    double upper(int var) const { return upper_[var]; }
    double cost(int var) const { return cost_[var]; }
    const std::string& name(int var) const { return names_[var]; }
    const Row& row(int i) const { return rows_[i]; }
    const std::vector<Row>& rows() const { return rows_; }

    /// Objective value of `x` (no feasibility check).
    double objective(const std::vector<double>& x) const;
    /// Largest bound or row violation of `x`, in the problem's units.
    double max_violation(const std::vector<double>& x) const;

  private:
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<double> cost_;
    std::vector<std::string> names_;
    std::vector<Row> rows_;
};

enum class LpStatus
{
    kOptimal,
    kInfeasible,
    kUnbounded,
    kIterationLimit,
};

const char* to_string(LpStatus status);

struct LpSolution
{
    LpStatus status = LpStatus::kInfeasible;
    double objective = 0.0;
    std::vector<double> x;
    /// d objective / d row bound; nonpositive on active upper bounds,
    /// nonnegative on active lower bounds.
    std::vector<double> row_duals;
    std::vector<double> reduced_costs;
    int iterations = 0;

    bool optimal() const { return status == LpStatus::kOptimal; }
};

struct SolverOptions
{
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-9;
    int max_iterations = 50000;
    int refactor_interval = 64;
    bool scale = true;
};

/// Bounded-variable revised simplex (two phase, Bland's rule). Output is a
/// deterministic function of the input problem.
LpSolution solve_lp(const LpProblem& problem, const SolverOptions& options = {});

/// Fixed-layout text dump: one objective line then one line per row.
void dump_lp(const LpProblem& problem, std::ostream& out);

} // namespace adeqsim::lp
