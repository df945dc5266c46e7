//! Synthetic station generator for scale experiments.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ConfigError;

/// Emits a `.station` document with `n_routes` routes. Every route gets 2 to
/// 4 track circuits, 1 or 2 switch points with a required position, and its
/// own light signal. Track circuits and switch points are drawn from shared
/// pools, so neighbouring routes overlap the way station throats do.
///
/// The output is a pure function of `(n_routes, seed)`.
pub fn gen_station(n_routes: usize, seed: u64) -> Result<String, ConfigError> {
    if n_routes == 0 {
        return Err(ConfigError::InvalidRouteCount(n_routes));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_tc = 2 * n_routes + 2;
    let n_sp = n_routes.div_ceil(2).max(2);

    let mut out = String::new();
    let _ = writeln!(out, "station gen{n_routes}s{seed}");
    let _ = writeln!(out, "# generated: routes={n_routes} seed={seed}");
    for i in 1..=n_tc {
        let _ = writeln!(out, "sensor tc{i} kind=TrackCircuit");
    }
    let _ = writeln!(out, "sensor mmi kind=MMI");
    for i in 1..=n_sp {
        let _ = writeln!(out, "actuator sp{i} kind=SwitchPoint");
    }
    for i in 1..=n_routes {
        let _ = writeln!(out, "actuator ls{i} kind=LightSignal");
    }
    for i in 1..=n_routes {
        let _ = writeln!(out, "logic route{i} kind=Route");
    }

    for i in 1..=n_routes {
        // Routes draw their track circuits from a window around their index
        // so that overlaps stay local.
        let window_start = (2 * (i - 1)).min(n_tc - 6.min(n_tc));
        let window = 6.min(n_tc);
        let k = rng.gen_range(2..=4usize).min(window);
        let mut tcs: Vec<usize> = sample(&mut rng, window, k).into_iter().map(|o| window_start + o + 1).collect();
        tcs.sort_unstable();
        let _ = write!(out, "assoc sensor route{i}");
        for tc in tcs {
            let _ = write!(out, " tc{tc}");
        }
        out.push('\n');

        let m = rng.gen_range(1..=2usize);
        let mut sps: Vec<usize> = sample(&mut rng, n_sp, m).into_iter().map(|o| o + 1).collect();
        sps.sort_unstable();
        let _ = write!(out, "assoc actuator route{i}");
        for sp in sps {
            let position = if rng.gen_bool(0.5) { "Straight" } else { "Reverse" };
            let _ = write!(out, " sp{sp}={position}");
        }
        let _ = writeln!(out, " ls{i}");
    }
    Ok(out)
}
