#pragma once

#include <array>

namespace snse {

using Barycentric = std::array<double, 3>;

// Local node layout shared by P3 and P2: vertices 0..2, then edge k (joining
// local vertices (k+1)%3 and (k+2)%3). P3 carries two nodes per edge, the
// first one nearer vertex (k+1)%3, and a barycentre bubble at index 9.
inline constexpr int kP3LocalDofs = 10;
inline constexpr int kP2LocalDofs = 6;

[[nodiscard]] const std::array<Barycentric, kP3LocalDofs>& p3_nodes();
[[nodiscard]] const std::array<Barycentric, kP2LocalDofs>& p2_nodes();

void p3_values(const Barycentric& l, std::array<double, kP3LocalDofs>& out);
/// Partial derivatives with respect to each barycentric coordinate, treated as independent.
void p3_partials(const Barycentric& l, std::array<std::array<double, 3>, kP3LocalDofs>& out);

void p2_values(const Barycentric& l, std::array<double, kP2LocalDofs>& out);
void p2_partials(const Barycentric& l, std::array<std::array<double, 3>, kP2LocalDofs>& out);

}  // namespace snse
