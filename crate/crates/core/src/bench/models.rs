//! Sources of the benchmark models. Each program defines a `main` node that
//! the runner steps once per input.

/// Beta-Bernoulli: estimating the bias of a coin.
pub const BETA_BERNOULLI: &str = "\
let proba coin (yobs) = xt where
  rec init xt = sample (beta (1., 1.))
  and () = observe (bernoulli xt, yobs)

let node main (yobs) = infer coin (yobs)
";

/// Gaussian-Gaussian: mean and variance of a Gaussian. Only the mean is
/// conjugate.
pub const GAUSSIAN_GAUSSIAN: &str = "\
let proba gaussian_model (o) = (mu, sigma) where
  rec init mu = sample (gaussian (0., 10.))
  and init sqrt_sigma = sample (gaussian (0., 1.))
  and sigma = sqrt_sigma *. sqrt_sigma
  and () = observe (gaussian (mu, sigma), o)

let node main (o) = infer gaussian_model (o)
";

/// One-dimensional Kalman filter.
pub const KALMAN_1D: &str = "\
let proba delay_kalman (yobs) = xt where
  rec xt = sample (gaussian ((0., 2500.) -> (pre xt, 1.)))
  and () = observe (gaussian (xt, 1.), yobs)

let node main (yobs) = infer delay_kalman (yobs)
";

/// Kalman filter whose sensor sometimes returns garbage.
pub const OUTLIER: &str = "\
let proba outlier (yobs) = (is_outlier, xt) where
  rec xt = sample (gaussian ((0., 2500.) -> (pre xt, 1.)))
  and init outlier_prob = sample (beta (100., 1000.))
  and is_outlier = sample (bernoulli outlier_prob)
  and () = present is_outlier ->
             observe (gaussian (0., 10000.), yobs)
           else observe (gaussian (xt, 1.), yobs)

let node main (yobs) = infer outlier (yobs)
";

/// Robot driven by an LQR controller fed with the estimated state of the
/// previous step. The environment is simulated in `main` from per-step noise
/// inputs. The GPS reading is a pair (available, position).
///
/// Globals: `a`, `b`, `noise`, `xo`, `uo`.
pub const ROBOT: &str = "\
let proba kalman (xo, u, acc, gps) = x where
  rec mu = xo -> (a *@ pre x) +@ (b *@ u)
  and x = sample (mv_gaussian (mu, noise))
  and () = observe (gaussian (vec_get (x, 2), 1.0), acc)
  and () = present fst gps ->
             observe (gaussian (vec_get (x, 0), 0.01), snd gps)
           else ()

let node main (w, acc_noise, gps_on, gps_noise) = (x_dist, x, u) where
  rec x_dist = infer kalman (xo, u, acc, gps)
  and u = uo -> lqr (a, b, mean (pre x_dist))
  and x = (xo -> (a *@ pre x) +@ (b *@ u)) +@ w
  and acc = vec_get (x, 2) +. acc_noise
  and gps = (gps_on, vec_get (x, 0) +. gps_noise)
";

/// One-dimensional SLAM on a strip of black and white cells. The agent sweeps
/// right then left, turning when the estimated position reaches an end.
/// `main` simulates the true position and the sensor from the slip and
/// sensor-error inputs; the true map is passed with every input.
///
/// Globals: `max_pos`, `sensor_noise`.
pub const SLAM: &str = "\
let proba move (x0, right) = x where
  rec slip = sample (bernoulli 0.1)
  and xp = x0 -> pre x
  and x = if right then min (max_pos, if slip then xp else xp + 1)
          else max (0, if slip then xp else xp - 1)

let proba slam (obs, right) = (map, x) where
  rec init map = sample (iid (bernoulli 0.5, max_pos + 1))
  and x = move (0, right)
  and o = get (map, x)
  and p = if o then 1. -. sensor_noise else sensor_noise
  and () = observe (bernoulli p, obs)

let node main (true_map, slip, flip) = (d, x, right) where
  rec d = infer slam (obs, right)
  and est = 0. -> snd (mean (pre d))
  and right = true -> (if pre right then est < float (max_pos) -. 0.5 else est < 0.5)
  and xp = 0 -> pre x
  and x = if right then min (max_pos, if slip then xp else xp + 1)
          else max (0, if slip then xp else xp - 1)
  and color = get (true_map, x)
  and obs = if flip then not color else color
";

/// A random walk that keeps its never-realized starting point in the output:
/// every step lengthens the chain from it.
pub const P1: &str = "\
let proba p1 (xo, obs) = (i, x) where
  rec init i = sample (gaussian (xo, 1.))
  and x = sample (gaussian (i -> pre x, 1.))
  and () = observe (gaussian (x, 1.), obs)

let node main (obs) = infer p1 (0., obs)
";

/// A random walk without observations: a chain of initialized nodes.
pub const P2: &str = "\
let proba p2 (xo) = x where
  rec x = sample (gaussian (xo -> pre x, 1.))

let node main (obs) = infer p2 (0.)
";

/// `P2` forcing the previous value at each step, which keeps it bounded.
pub const P2_EVAL: &str = "\
let proba p2 (xo) = x where
  rec x = sample (gaussian (xo -> pre x, 1.))
  and _ = eval (xo -> pre x)

let node main (obs) = infer p2 (0.)
";
