#include "snse/lagrange.hpp"

namespace snse {

namespace {

constexpr int edge_a(int k) { return (k + 1) % 3; }
constexpr int edge_b(int k) { return (k + 2) % 3; }

}  // namespace

const std::array<Barycentric, kP3LocalDofs>& p3_nodes() {
  static const std::array<Barycentric, kP3LocalDofs> nodes = [] {
    std::array<Barycentric, kP3LocalDofs> n{};
    for (int v = 0; v < 3; ++v) {
      n[v] = {0.0, 0.0, 0.0};
      n[v][v] = 1.0;
    }
    for (int k = 0; k < 3; ++k) {
      Barycentric near_a{0.0, 0.0, 0.0}, near_b{0.0, 0.0, 0.0};
      near_a[edge_a(k)] = 2.0 / 3.0;
      near_a[edge_b(k)] = 1.0 / 3.0;
      near_b[edge_a(k)] = 1.0 / 3.0;
      near_b[edge_b(k)] = 2.0 / 3.0;
      n[3 + 2 * k] = near_a;
      n[4 + 2 * k] = near_b;
    }
    n[9] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    return n;
  }();
  return nodes;
}

const std::array<Barycentric, kP2LocalDofs>& p2_nodes() {
  static const std::array<Barycentric, kP2LocalDofs> nodes = [] {
    std::array<Barycentric, kP2LocalDofs> n{};
    for (int v = 0; v < 3; ++v) {
      n[v] = {0.0, 0.0, 0.0};
      n[v][v] = 1.0;
    }
    for (int k = 0; k < 3; ++k) {
      n[3 + k] = {0.0, 0.0, 0.0};
      n[3 + k][edge_a(k)] = 0.5;
      n[3 + k][edge_b(k)] = 0.5;
    }
    return n;
  }();
  return nodes;
}

void p3_values(const Barycentric& l, std::array<double, kP3LocalDofs>& out) {
  for (int v = 0; v < 3; ++v) {
    out[v] = 0.5 * l[v] * (3.0 * l[v] - 1.0) * (3.0 * l[v] - 2.0);
  }
  for (int k = 0; k < 3; ++k) {
    const double a = l[edge_a(k)], b = l[edge_b(k)];
    out[3 + 2 * k] = 4.5 * a * b * (3.0 * a - 1.0);
    out[4 + 2 * k] = 4.5 * a * b * (3.0 * b - 1.0);
  }
  out[9] = 27.0 * l[0] * l[1] * l[2];
}

void p3_partials(const Barycentric& l, std::array<std::array<double, 3>, kP3LocalDofs>& out) {
  for (auto& row : out) row = {0.0, 0.0, 0.0};
  for (int v = 0; v < 3; ++v) {
    const double x = l[v];
    out[v][v] = 0.5 * (27.0 * x * x - 18.0 * x + 2.0);
  }
  for (int k = 0; k < 3; ++k) {
    const int ia = edge_a(k), ib = edge_b(k);
    const double a = l[ia], b = l[ib];
    // 4.5 a b (3a - 1)
    out[3 + 2 * k][ia] = 4.5 * b * (6.0 * a - 1.0);
    out[3 + 2 * k][ib] = 4.5 * a * (3.0 * a - 1.0);
    // 4.5 a b (3b - 1)
    out[4 + 2 * k][ia] = 4.5 * b * (3.0 * b - 1.0);
    out[4 + 2 * k][ib] = 4.5 * a * (6.0 * b - 1.0);
  }
  out[9] = {27.0 * l[1] * l[2], 27.0 * l[0] * l[2], 27.0 * l[0] * l[1]};
}

void p2_values(const Barycentric& l, std::array<double, kP2LocalDofs>& out) {
  for (int v = 0; v < 3; ++v) out[v] = l[v] * (2.0 * l[v] - 1.0);
  for (int k = 0; k < 3; ++k) out[3 + k] = 4.0 * l[edge_a(k)] * l[edge_b(k)];
}

void p2_partials(const Barycentric& l, std::array<std::array<double, 3>, kP2LocalDofs>& out) {
  for (auto& row : out) row = {0.0, 0.0, 0.0};
  for (int v = 0; v < 3; ++v) out[v][v] = 4.0 * l[v] - 1.0;
  for (int k = 0; k < 3; ++k) {
    out[3 + k][edge_a(k)] = 4.0 * l[edge_b(k)];
    out[3 + k][edge_b(k)] = 4.0 * l[edge_a(k)];
  }
}

}  // namespace snse
