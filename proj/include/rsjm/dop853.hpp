#pragma once

// Dormand-Prince 8(5,3) embedded Runge-Kutta pair with the 7th order dense
// output of Hairer, Norsett & Wanner (DOP853), written as a header-only
// template over the scalar type so the same driver integrates real phase
// equations and complex Riccati / Heun systems.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

namespace rsjm::ode {

template <class Scalar, std::size_t N>
using State = std::array<Scalar, N>;

struct Dop853Options {
  double rtol = 1e-12;
  double atol = 1e-12;
  /// 0 selects the automatic initial step.
  double initial_step = 0.0;
  /// 0 means unbounded (|t1 - t0|).
  double max_step = 0.0;
  std::size_t max_steps = 2'000'000;
  /// Integral-controller exponent weight; 0 reduces to the classic I controller.
  double pi_beta = 0.04;
  bool dense = true;
};

enum class Status { completed, stopped_by_observer, step_size_underflow, max_steps_exceeded };

namespace detail {

template <class Scalar, std::size_t N>
State<Scalar, N> axpy(const State<Scalar, N>& y, double h, const State<Scalar, N>& k) {
  State<Scalar, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h * k[i];
  return out;
}

// Linear combination  y + h * sum_j c_j k_j.
template <class Scalar, std::size_t N, std::size_t M>
State<Scalar, N> combine(const State<Scalar, N>& y, double h, const std::array<double, M>& c,
                         const std::array<const State<Scalar, N>*, M>& k) {
  State<Scalar, N> out;
  for (std::size_t i = 0; i < N; ++i) {
    Scalar acc{};
    for (std::size_t j = 0; j < M; ++j) acc += c[j] * (*k[j])[i];
    out[i] = y[i] + h * acc;
  }
  return out;
}

template <class Scalar>
double magnitude(const Scalar& x) {
  using std::abs;
  return abs(x);
}

template <class Scalar, std::size_t N>
bool all_finite(const State<Scalar, N>& y) {
  for (const auto& v : y) {
    if (!std::isfinite(magnitude(v))) return false;
  }
  return true;
}

namespace c {
inline constexpr double c2 = 0.526001519587677318785587544488e-01;
inline constexpr double c3 = 0.789002279381515978178381316732e-01;
inline constexpr double c4 = 0.118350341907227396726757197510e+00;
inline constexpr double c5 = 0.281649658092772603273242802490e+00;
inline constexpr double c6 = 0.333333333333333333333333333333e+00;
inline constexpr double c7 = 0.25e+00;
inline constexpr double c8 = 0.307692307692307692307692307692e+00;
inline constexpr double c9 = 0.651282051282051282051282051282e+00;
inline constexpr double c10 = 0.6e+00;
inline constexpr double c11 = 0.857142857142857142857142857142e+00;
inline constexpr double c14 = 0.1e+00;
inline constexpr double c15 = 0.2e+00;
inline constexpr double c16 = 0.777777777777777777777777777778e+00;

inline constexpr double a21 = 5.26001519587677318785587544488e-2;
inline constexpr double a31 = 1.97250569845378994544595329183e-2;
inline constexpr double a32 = 5.91751709536136983633785987549e-2;
inline constexpr double a41 = 2.95875854768068491816892993775e-2;
inline constexpr double a43 = 8.87627564304205475450678981324e-2;
inline constexpr double a51 = 2.41365134159266685502369798665e-1;
inline constexpr double a53 = -8.84549479328286085344864962717e-1;
inline constexpr double a54 = 9.24834003261792003115737966543e-1;
inline constexpr double a61 = 3.7037037037037037037037037037e-2;
inline constexpr double a64 = 1.70828608729473871279604482173e-1;
inline constexpr double a65 = 1.25467687566822425016691814123e-1;
inline constexpr double a71 = 3.7109375e-2;
inline constexpr double a74 = 1.70252211019544039314978060272e-1;
inline constexpr double a75 = 6.02165389804559606850219397283e-2;
inline constexpr double a76 = -1.7578125e-2;
inline constexpr double a81 = 3.70920001185047927108779319836e-2;
inline constexpr double a84 = 1.70383925712239993810214054705e-1;
inline constexpr double a85 = 1.07262030446373284651809199168e-1;
inline constexpr double a86 = -1.53194377486244017527936158236e-2;
inline constexpr double a87 = 8.27378916381402288758473766002e-3;
inline constexpr double a91 = 6.24110958716075717114429577812e-1;
inline constexpr double a94 = -3.36089262944694129406857109825e0;
inline constexpr double a95 = -8.68219346841726006818189891453e-1;
inline constexpr double a96 = 2.75920996994467083049415600797e1;
inline constexpr double a97 = 2.01540675504778934086186788979e1;
inline constexpr double a98 = -4.34898841810699588477366255144e1;
inline constexpr double a101 = 4.77662536438264365890433908527e-1;
inline constexpr double a104 = -2.48811461997166764192642586468e0;
inline constexpr double a105 = -5.90290826836842996371446475743e-1;
inline constexpr double a106 = 2.12300514481811942347288949897e1;
inline constexpr double a107 = 1.52792336328824235832596922938e1;
inline constexpr double a108 = -3.32882109689848629194453265587e1;
inline constexpr double a109 = -2.03312017085086261358222928593e-2;
inline constexpr double a111 = -9.3714243008598732571704021658e-1;
inline constexpr double a114 = 5.18637242884406370830023853209e0;
inline constexpr double a115 = 1.09143734899672957818500254654e0;
inline constexpr double a116 = -8.14978701074692612513997267357e0;
inline constexpr double a117 = -1.85200656599969598641566180701e1;
inline constexpr double a118 = 2.27394870993505042818970056734e1;
inline constexpr double a119 = 2.49360555267965238987089396762e0;
inline constexpr double a1110 = -3.0467644718982195003823669022e0;
inline constexpr double a121 = 2.27331014751653820792359768449e0;
inline constexpr double a124 = -1.05344954667372501984066689879e1;
inline constexpr double a125 = -2.00087205822486249909675718444e0;
inline constexpr double a126 = -1.79589318631187989172765950534e1;
inline constexpr double a127 = 2.79488845294199600508499808837e1;
inline constexpr double a128 = -2.85899827713502369474065508674e0;
inline constexpr double a129 = -8.87285693353062954433549289258e0;
inline constexpr double a1210 = 1.23605671757943030647266201528e1;
inline constexpr double a1211 = 6.43392746015763530355970484046e-1;

inline constexpr double a141 = 5.61675022830479523392909219681e-2;
inline constexpr double a147 = 2.53500210216624811088794765333e-1;
inline constexpr double a148 = -2.46239037470802489917441475441e-1;
inline constexpr double a149 = -1.24191423263816360469010140626e-1;
inline constexpr double a1410 = 1.5329179827876569731206322685e-1;
inline constexpr double a1411 = 8.20105229563468988491666602057e-3;
inline constexpr double a1412 = 7.56789766054569976138603589584e-3;
inline constexpr double a1413 = -8.298e-3;
inline constexpr double a151 = 3.18346481635021405060768473261e-2;
inline constexpr double a156 = 2.83009096723667755288322961402e-2;
inline constexpr double a157 = 5.35419883074385676223797384372e-2;
inline constexpr double a158 = -5.49237485713909884646569340306e-2;
inline constexpr double a1511 = -1.08347328697249322858509316994e-4;
inline constexpr double a1512 = 3.82571090835658412954920192323e-4;
inline constexpr double a1513 = -3.40465008687404560802977114492e-4;
inline constexpr double a1514 = 1.41312443674632500278074618366e-1;
inline constexpr double a161 = -4.28896301583791923408573538692e-1;
inline constexpr double a166 = -4.69762141536116384314449447206e0;
inline constexpr double a167 = 7.68342119606259904184240953878e0;
inline constexpr double a168 = 4.06898981839711007970213554331e0;
inline constexpr double a169 = 3.56727187455281109270669543021e-1;
inline constexpr double a1613 = -1.39902416515901462129418009734e-3;
inline constexpr double a1614 = 2.9475147891527723389556272149e0;
inline constexpr double a1615 = -9.15095847217987001081870187138e0;

inline constexpr double b1 = 5.42937341165687622380535766363e-2;
inline constexpr double b6 = 4.45031289275240888144113950566e0;
inline constexpr double b7 = 1.89151789931450038304281599044e0;
inline constexpr double b8 = -5.8012039600105847814672114227e0;
inline constexpr double b9 = 3.1116436695781989440891606237e-1;
inline constexpr double b10 = -1.52160949662516078556178806805e-1;
inline constexpr double b11 = 2.01365400804030348374776537501e-1;
inline constexpr double b12 = 4.47106157277725905176885569043e-2;

inline constexpr double bhh1 = 0.244094488188976377952755905512e+00;
inline constexpr double bhh2 = 0.733846688281611857341361741547e+00;
inline constexpr double bhh3 = 0.220588235294117647058823529412e-01;

inline constexpr double er1 = 0.1312004499419488073250102996e-01;
inline constexpr double er6 = -0.1225156446376204440720569753e+01;
inline constexpr double er7 = -0.4957589496572501915214079952e+00;
inline constexpr double er8 = 0.1664377182454986536961530415e+01;
inline constexpr double er9 = -0.3503288487499736816886487290e+00;
inline constexpr double er10 = 0.3341791187130174790297318841e+00;
inline constexpr double er11 = 0.8192320648511571246570742613e-01;
inline constexpr double er12 = -0.2235530786388629525884427845e-01;

inline constexpr double d41 = -0.84289382761090128651353491142e+01;
inline constexpr double d46 = 0.56671495351937776962531783590e+00;
inline constexpr double d47 = -0.30689499459498916912797304727e+01;
inline constexpr double d48 = 0.23846676565120698287728149680e+01;
inline constexpr double d49 = 0.21170345824450282767155149946e+01;
inline constexpr double d410 = -0.87139158377797299206789907490e+00;
inline constexpr double d411 = 0.22404374302607882758541771650e+01;
inline constexpr double d412 = 0.63157877876946881815570249290e+00;
inline constexpr double d413 = -0.88990336451333310820698117400e-01;
inline constexpr double d414 = 0.18148505520854727256656404962e+02;
inline constexpr double d415 = -0.91946323924783554000451984436e+01;
inline constexpr double d416 = -0.44360363875948939664310572000e+01;
inline constexpr double d51 = 0.10427508642579134603413151009e+02;
inline constexpr double d56 = 0.24228349177525818288430175319e+03;
inline constexpr double d57 = 0.16520045171727028198505394887e+03;
inline constexpr double d58 = -0.37454675472269020279518312152e+03;
inline constexpr double d59 = -0.22113666853125306036270938578e+02;
inline constexpr double d510 = 0.77334326684722638389603898808e+01;
inline constexpr double d511 = -0.30674084731089398182061213626e+02;
inline constexpr double d512 = -0.93321305264302278729567221706e+01;
inline constexpr double d513 = 0.15697238121770843886131091075e+02;
inline constexpr double d514 = -0.31139403219565177677282850411e+02;
inline constexpr double d515 = -0.93529243588444783865713862664e+01;
inline constexpr double d516 = 0.35816841486394083752465898540e+02;
inline constexpr double d61 = 0.19985053242002433820987653617e+02;
inline constexpr double d66 = -0.38703730874935176555105901742e+03;
inline constexpr double d67 = -0.18917813819516756882830838328e+03;
inline constexpr double d68 = 0.52780815920542364900561016686e+03;
inline constexpr double d69 = -0.11573902539959630126141871134e+02;
inline constexpr double d610 = 0.68812326946963000169666922661e+01;
inline constexpr double d611 = -0.10006050966910838403183860980e+01;
inline constexpr double d612 = 0.77771377980534432092869265740e+00;
inline constexpr double d613 = -0.27782057523535084065932004339e+01;
inline constexpr double d614 = -0.60196695231264120758267380846e+02;
inline constexpr double d615 = 0.84320405506677161018159903784e+02;
inline constexpr double d616 = 0.11992291136182789328035130030e+02;
inline constexpr double d71 = -0.25693933462703749003312586129e+02;
inline constexpr double d76 = -0.15418974869023643374053993627e+03;
inline constexpr double d77 = -0.23152937917604549567536039109e+03;
inline constexpr double d78 = 0.35763911791061412378285349910e+03;
inline constexpr double d79 = 0.93405324183624310003907691704e+02;
inline constexpr double d710 = -0.37458323136451633156875139351e+02;
inline constexpr double d711 = 0.10409964950896230045147246184e+03;
inline constexpr double d712 = 0.29840293426660503123344363579e+02;
inline constexpr double d713 = -0.43533456590011143754432175058e+02;
inline constexpr double d714 = 0.96324553959188282948394950600e+02;
inline constexpr double d715 = -0.39177261675615439165231486172e+02;
inline constexpr double d716 = -0.14972683625798562581422125276e+03;
}  // namespace c

}  // namespace detail

/// One accepted step with its 7th order continuous extension.
template <class Scalar, std::size_t N>
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  std::array<State<Scalar, N>, 8> r{};

  double t_lo() const noexcept { return h > 0 ? t0 : t0 + h; }
  double t_hi() const noexcept { return h > 0 ? t0 + h : t0; }

  State<Scalar, N> eval(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    State<Scalar, N> y;
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = r[0][i] +
             s * (r[1][i] +
                  s1 * (r[2][i] + s * (r[3][i] + s1 * (r[4][i] + s * (r[5][i] + s1 * (r[6][i] + s * r[7][i]))))));
    }
    return y;
  }

  /// Time derivative of the interpolant.
  State<Scalar, N> derivative(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    State<Scalar, N> dy;
    for (std::size_t i = 0; i < N; ++i) {
      Scalar a = r[6][i] + s * r[7][i];
      Scalar da = r[7][i];
      Scalar b = r[5][i] + s1 * a;
      Scalar db = -a + s1 * da;
      a = r[4][i] + s * b;
      da = b + s * db;
      b = r[3][i] + s1 * a;
      db = -a + s1 * da;
      a = r[2][i] + s * b;
      da = b + s * db;
      b = r[1][i] + s1 * a;
      db = -a + s1 * da;
      dy[i] = (b + s * db) / h;
    }
    return dy;
  }
};

/// Piecewise dense representation covering [t_begin, t_end] (either
/// orientation). Accepted states are stored so evaluation at a step endpoint
/// returns exactly the integrator's state.
template <class Scalar, std::size_t N>
class DenseSolution {
 public:
  DenseSolution() = default;

  void push(DenseStep<Scalar, N> step, double t_new, const State<Scalar, N>& y_new) {
    steps_.push_back(std::move(step));
    node_t_.push_back(t_new);
    node_y_.push_back(y_new);
  }

  void set_origin(double t0, const State<Scalar, N>& y0) {
    node_t_.assign(1, t0);
    node_y_.assign(1, y0);
    steps_.clear();
  }

  bool empty() const noexcept { return steps_.empty(); }
  std::size_t size() const noexcept { return steps_.size(); }
  const std::vector<DenseStep<Scalar, N>>& steps() const noexcept { return steps_; }
  const std::vector<double>& node_times() const noexcept { return node_t_; }
  const std::vector<State<Scalar, N>>& node_states() const noexcept { return node_y_; }

  double t_begin() const noexcept { return node_t_.front(); }
  double t_end() const noexcept { return node_t_.back(); }
  double t_lo() const noexcept { return std::min(t_begin(), t_end()); }
  double t_hi() const noexcept { return std::max(t_begin(), t_end()); }
  bool contains(double t) const noexcept { return t >= t_lo() && t <= t_hi(); }

  State<Scalar, N> eval(double t) const {
    const std::size_t k = locate(t);
    if (k == npos) return node_y_.front();
    const auto& st = steps_[k];
    if (t == st.t0) return node_y_[k];
    if (t == st.t0 + st.h) return node_y_[k + 1];
    return st.eval(t);
  }

  State<Scalar, N> derivative(double t) const {
    const std::size_t k = locate(t);
    if (k == npos) return State<Scalar, N>{};
    return steps_[k].derivative(t);
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  // Index of the step whose closed interval contains t (clamped to the ends).
  std::size_t locate(double t) const {
    if (steps_.empty()) return npos;
    const bool forward = steps_.front().h > 0;
    std::size_t lo = 0, hi = steps_.size();
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      const bool past = forward ? t >= steps_[mid].t0 : t <= steps_[mid].t0;
      if (past) lo = mid; else hi = mid;
    }
    return lo;
  }

  std::vector<DenseStep<Scalar, N>> steps_;
  std::vector<double> node_t_;
  std::vector<State<Scalar, N>> node_y_;
};

template <class Scalar, std::size_t N>
struct IntegrationResult {
  Status status = Status::completed;
  double t = 0.0;
  State<Scalar, N> y{};
  DenseSolution<Scalar, N> dense;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;

  bool ok() const noexcept { return status == Status::completed; }
};

struct NoObserver {
  template <class... Args>
  constexpr bool operator()(Args&&...) const noexcept { return true; }
};

/// Integrates y' = f(t, y) from t0 to t1 (t1 < t0 allowed). The observer is
/// called after every accepted step with (t, y) and may return false to stop.
template <class Scalar, std::size_t N, class Rhs, class Observer = NoObserver>
IntegrationResult<Scalar, N> integrate_dop853(Rhs&& f, double t0, const State<Scalar, N>& y0, double t1,
                                              const Dop853Options& opt, Observer&& observe = {}) {
  using S = State<Scalar, N>;
  using namespace detail::c;
  using detail::combine;
  using detail::magnitude;

  IntegrationResult<Scalar, N> res;
  res.t = t0;
  res.y = y0;
  res.dense.set_origin(t0, y0);
  if (t1 == t0) return res;

  constexpr double uround = std::numeric_limits<double>::epsilon();
  constexpr double safe = 0.9;
  constexpr double facc1 = 1.0 / 0.333;
  constexpr double facc2 = 1.0 / 6.0;
  const double beta = opt.pi_beta;
  const double expo1 = 1.0 / 8.0 - beta * 0.2;
  const double direction = t1 > t0 ? 1.0 : -1.0;
  const double hmax = opt.max_step > 0 ? opt.max_step : std::abs(t1 - t0);

  auto scale = [&](const S& a, const S& b, std::size_t i) {
    return opt.atol + opt.rtol * std::max(magnitude(a[i]), magnitude(b[i]));
  };
  auto eval = [&](double t, const S& y) {
    ++res.evaluations;
    return f(t, y);
  };

  double t = t0;
  S y = y0;
  S k1 = eval(t, y);

  double h = opt.initial_step;
  if (h <= 0.0) {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = opt.atol + opt.rtol * magnitude(y[i]);
      dnf += std::pow(magnitude(k1[i]) / sk, 2);
      dny += std::pow(magnitude(y[i]) / sk, 2);
    }
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, hmax);
    const S y1 = detail::axpy(y, direction * h, k1);
    const S f1 = eval(t + direction * h, y1);
    double der2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = opt.atol + opt.rtol * magnitude(y[i]);
      der2 += std::pow(magnitude(f1[i] - k1[i]) / sk, 2);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 1.0 / 8.0);
    h = std::min({100.0 * std::abs(h), h1, hmax});
  }
  h = std::min(std::abs(h), hmax) * direction;

  double facold = 1e-4;
  bool last = false;
  bool reject = false;

  while (true) {
    if (res.accepted + res.rejected >= opt.max_steps) {
      res.status = Status::max_steps_exceeded;
      break;
    }
    if (0.1 * std::abs(h) <= std::abs(t) * uround || std::abs(h) < 1e-300) {
      res.status = Status::step_size_underflow;
      break;
    }
    if ((t + 1.01 * h - t1) * direction > 0.0) {
      h = t1 - t;
      last = true;
    }

    const S k2 = eval(t + c2 * h, combine<Scalar, N, 1>(y, h, {a21}, {&k1}));
    const S k3 = eval(t + c3 * h, combine<Scalar, N, 2>(y, h, {a31, a32}, {&k1, &k2}));
    const S k4 = eval(t + c4 * h, combine<Scalar, N, 2>(y, h, {a41, a43}, {&k1, &k3}));
    const S k5 = eval(t + c5 * h, combine<Scalar, N, 3>(y, h, {a51, a53, a54}, {&k1, &k3, &k4}));
    const S k6 = eval(t + c6 * h, combine<Scalar, N, 3>(y, h, {a61, a64, a65}, {&k1, &k4, &k5}));
    const S k7 = eval(t + c7 * h, combine<Scalar, N, 4>(y, h, {a71, a74, a75, a76}, {&k1, &k4, &k5, &k6}));
    const S k8 =
        eval(t + c8 * h, combine<Scalar, N, 5>(y, h, {a81, a84, a85, a86, a87}, {&k1, &k4, &k5, &k6, &k7}));
    const S k9 = eval(t + c9 * h, combine<Scalar, N, 6>(y, h, {a91, a94, a95, a96, a97, a98},
                                                        {&k1, &k4, &k5, &k6, &k7, &k8}));
    const S k10 = eval(t + c10 * h, combine<Scalar, N, 7>(y, h, {a101, a104, a105, a106, a107, a108, a109},
                                                          {&k1, &k4, &k5, &k6, &k7, &k8, &k9}));
    const S k11 = eval(t + c11 * h, combine<Scalar, N, 8>(y, h, {a111, a114, a115, a116, a117, a118, a119, a1110},
                                                          {&k1, &k4, &k5, &k6, &k7, &k8, &k9, &k10}));
    const double t_new = t + h;
    const S k12 =
        eval(t_new, combine<Scalar, N, 9>(y, h, {a121, a124, a125, a126, a127, a128, a129, a1210, a1211},
                                          {&k1, &k4, &k5, &k6, &k7, &k8, &k9, &k10, &k11}));

    S incr;
    for (std::size_t i = 0; i < N; ++i) {
      incr[i] = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] + b10 * k10[i] + b11 * k11[i] +
                b12 * k12[i];
    }
    const S y_new = detail::axpy(y, h, incr);

    double err = 0.0, err2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = scale(y, y_new, i);
      const double e3 = magnitude(incr[i] - bhh1 * k1[i] - bhh2 * k9[i] - bhh3 * k12[i]);
      const double e5 = magnitude(er1 * k1[i] + er6 * k6[i] + er7 * k7[i] + er8 * k8[i] + er9 * k9[i] +
                                  er10 * k10[i] + er11 * k11[i] + er12 * k12[i]);
      err2 += (e3 / sk) * (e3 / sk);
      err += (e5 / sk) * (e5 / sk);
    }
    double deno = err + 0.01 * err2;
    if (deno <= 0.0) deno = 1.0;
    err = std::abs(h) * err * std::sqrt(1.0 / (static_cast<double>(N) * deno));
    if (!std::isfinite(err) || !detail::all_finite<Scalar, N>(y_new)) err = 1e10;

    const double fac11 = std::pow(err, expo1);
    double fac = fac11 / std::pow(facold, beta);
    fac = std::max(facc2, std::min(facc1, fac / safe));
    double h_new = h / fac;

    if (err <= 1.0) {
      facold = std::max(err, 1e-4);
      ++res.accepted;
      const S k13 = eval(t_new, y_new);

      if (opt.dense) {
        DenseStep<Scalar, N> st;
        st.t0 = t;
        st.h = h;
        auto& r = st.r;
        for (std::size_t i = 0; i < N; ++i) {
          r[0][i] = y[i];
          const Scalar ydiff = y_new[i] - y[i];
          r[1][i] = ydiff;
          const Scalar bspl = h * k1[i] - ydiff;
          r[2][i] = bspl;
          r[3][i] = ydiff - h * k13[i] - bspl;
          r[4][i] = d41 * k1[i] + d46 * k6[i] + d47 * k7[i] + d48 * k8[i] + d49 * k9[i] + d410 * k10[i] +
                    d411 * k11[i] + d412 * k12[i];
          r[5][i] = d51 * k1[i] + d56 * k6[i] + d57 * k7[i] + d58 * k8[i] + d59 * k9[i] + d510 * k10[i] +
                    d511 * k11[i] + d512 * k12[i];
          r[6][i] = d61 * k1[i] + d66 * k6[i] + d67 * k7[i] + d68 * k8[i] + d69 * k9[i] + d610 * k10[i] +
                    d611 * k11[i] + d612 * k12[i];
          r[7][i] = d71 * k1[i] + d76 * k6[i] + d77 * k7[i] + d78 * k8[i] + d79 * k9[i] + d710 * k10[i] +
                    d711 * k11[i] + d712 * k12[i];
        }
        const S k14 = eval(t + c14 * h, combine<Scalar, N, 8>(y, h, {a141, a147, a148, a149, a1410, a1411, a1412, a1413},
                                                              {&k1, &k7, &k8, &k9, &k10, &k11, &k12, &k13}));
        const S k15 = eval(t + c15 * h, combine<Scalar, N, 8>(y, h, {a151, a156, a157, a158, a1511, a1512, a1513, a1514},
                                                              {&k1, &k6, &k7, &k8, &k11, &k12, &k13, &k14}));
        const S k16 = eval(t + c16 * h, combine<Scalar, N, 8>(y, h, {a161, a166, a167, a168, a169, a1613, a1614, a1615},
                                                              {&k1, &k6, &k7, &k8, &k9, &k13, &k14, &k15}));
        for (std::size_t i = 0; i < N; ++i) {
          r[4][i] = h * (r[4][i] + d413 * k13[i] + d414 * k14[i] + d415 * k15[i] + d416 * k16[i]);
          r[5][i] = h * (r[5][i] + d513 * k13[i] + d514 * k14[i] + d515 * k15[i] + d516 * k16[i]);
          r[6][i] = h * (r[6][i] + d613 * k13[i] + d614 * k14[i] + d615 * k15[i] + d616 * k16[i]);
          r[7][i] = h * (r[7][i] + d713 * k13[i] + d714 * k14[i] + d715 * k15[i] + d716 * k16[i]);
        }
        res.dense.push(std::move(st), t_new, y_new);
      }

      k1 = k13;
      y = y_new;
      t = last ? t1 : t_new;
      res.t = t;
      res.y = y;

      if (!observe(t, static_cast<const S&>(y))) {
        res.status = Status::stopped_by_observer;
        break;
      }
      if (last) {
        res.status = Status::completed;
        break;
      }
      if (std::abs(h_new) > hmax) h_new = direction * hmax;
      if (reject) h_new = direction * std::min(std::abs(h_new), std::abs(h));
      reject = false;
    } else {
      h_new = h / std::min(facc1, fac11 / safe);
      reject = true;
      last = false;
      ++res.rejected;
    }
    h = h_new;
  }
  return res;
}

}  // namespace rsjm::ode
