#ifndef PENCIL_SRC_QUADRATURE_HPP
#define PENCIL_SRC_QUADRATURE_HPP

#include <array>
#include <cstddef>

namespace pencil::quadrature {

// 20-point Gauss-Legendre rule on [-1, 1], positive half; mirror for the rest.
struct GlPoint {
  double x, w;
};

inline constexpr std::array<GlPoint, 10> kGl20Half = {{
    {7.65265211334973383e-02, 1.52753387130725782e-01},
    {2.27785851141645096e-01, 1.49172986472603658e-01},
    {3.73706088715419549e-01, 1.42096109318381875e-01},
    {5.10867001950827126e-01, 1.31688638449176526e-01},
    {6.36053680726515025e-01, 1.18194531961518245e-01},
    {7.46331906460150796e-01, 1.01930119817240261e-01},
    {8.39116971822218782e-01, 8.32767415767046715e-02},
    {9.12234428251325835e-01, 6.26720483341094425e-02},
    {9.63971927277913809e-01, 4.06014298003862170e-02},
    {9.93128599185094885e-01, 1.76140071391532732e-02},
}};

// Appends the 20 mapped nodes and weights for [a, b] to xs/ws, ascending.
template <class Vec>
void gl20_panel(double a, double b, Vec& xs, Vec& ws) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (size_t i = kGl20Half.size(); i-- > 0;) {
    xs.push_back(mid - half * kGl20Half[i].x);
    ws.push_back(half * kGl20Half[i].w);
  }
  for (const auto& p : kGl20Half) {
    xs.push_back(mid + half * p.x);
    ws.push_back(half * p.w);
  }
}

}  // namespace pencil::quadrature

#endif
