#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fha {

using Vector = std::vector<double>;

/// Flat output and its time derivatives: derivs[k] is the k-th derivative.
struct OutputJet {
    std::vector<Vector> derivs;

    [[nodiscard]] static OutputJet constant(Vector z, std::size_t order = 0);

    [[nodiscard]] std::size_t dim() const { return derivs.empty() ? 0 : derivs.front().size(); }
    /// Highest derivative carried.
    [[nodiscard]] std::size_t order() const { return derivs.empty() ? 0 : derivs.size() - 1; }
    [[nodiscard]] const Vector& value() const { return derivs.at(0); }
    /// k-th derivative, or zeros if the jet does not carry it.
    [[nodiscard]] Vector derivative(std::size_t k) const;
};

/// Square root with a guard band: radicands in [-1e-12, 0) evaluate to 0,
/// anything more negative throws DomainError.
[[nodiscard]] double safe_sqrt(double r);

/// Flatness maps of one continuous subsystem.
///
///   z = F(x, u, u', ..., u^(a))      x = Phi(z, ..., z^(b))
///   u = Psi(z, ..., z^(c))           x' = f(x, u)
///
/// `initial_output` picks a flat output consistent with a given state: the
/// components x determines are reproduced, the others are taken from `hint`.
class FlatMaps {
public:
    using OutputFn = std::function<Vector(const Vector& x, const std::vector<Vector>& u_jet)>;
    using JetFn = std::function<Vector(const OutputJet& jet)>;
    using FieldFn = std::function<Vector(const Vector& x, const Vector& u)>;
    using LiftFn = std::function<Vector(const Vector& x, const Vector& hint)>;

    struct Spec {
        std::size_t nx = 0;
        std::size_t nu = 0;
        std::size_t nz = 0;
        std::size_t order_a = 0;
        std::size_t order_b = 0;
        std::size_t order_c = 0;
        OutputFn output;
        JetFn inverse_state;
        JetFn inverse_input;
        FieldFn field;
        LiftFn initial_output;
    };

    FlatMaps() = default;
    /// Throws ModelError when nz != nu or a map is missing.
    explicit FlatMaps(Spec spec);

    [[nodiscard]] std::size_t nx() const { return spec_.nx; }
    [[nodiscard]] std::size_t nu() const { return spec_.nu; }
    [[nodiscard]] std::size_t nz() const { return spec_.nz; }
    [[nodiscard]] std::size_t order_a() const { return spec_.order_a; }
    [[nodiscard]] std::size_t order_b() const { return spec_.order_b; }
    [[nodiscard]] std::size_t order_c() const { return spec_.order_c; }

    [[nodiscard]] Vector output(const Vector& x, const std::vector<Vector>& u_jet) const;
    [[nodiscard]] Vector inverse_state(const OutputJet& jet) const;
    [[nodiscard]] Vector inverse_input(const OutputJet& jet) const;
    [[nodiscard]] Vector field(const Vector& x, const Vector& u) const;
    [[nodiscard]] Vector initial_output(const Vector& x, const Vector& hint) const;

private:
    Spec spec_;
};

/// Polynomial flat-output segment over local time tau in [0, duration],
/// power basis: z_i(tau) = sum_k coeffs[i][k] tau^k.
struct TrajectorySegment {
    double duration = 0.0;
    std::vector<Vector> coeffs;
    /// Value and first derivative at tau = 0 and tau = duration.
    OutputJet start;
    OutputJet end;

    [[nodiscard]] std::size_t dim() const { return coeffs.size(); }
    [[nodiscard]] std::size_t degree() const;
};

/// Degree 1 joins the boundary values linearly.  Degree 3 also matches the
/// boundary first derivatives (zero where the jets carry none).
/// Throws Error for duration <= 0, an unsupported degree or mismatched jets.
[[nodiscard]] TrajectorySegment plan_segment(const OutputJet& start, const OutputJet& end, double duration,
                                             int degree);

/// Value and derivatives up to `order` at local time tau.  Throws Error when
/// tau lies outside [0, duration].
[[nodiscard]] OutputJet evaluate_segment(const TrajectorySegment& s, double tau, std::size_t order);

/// Largest |d/dt Phi(jet) - f(Phi(jet), Psi(jet))| over `samples` interior
/// points, with the derivative taken by central differences of step 1e-5.
[[nodiscard]] double flatness_consistency(const FlatMaps& m, const TrajectorySegment& s, std::size_t samples);

}  // namespace fha
