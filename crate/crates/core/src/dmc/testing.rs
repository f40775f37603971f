//! Small channels shared by unit tests across modules.

use rand::Rng;

use super::DmcChannel;

pub(crate) fn bsc(p: f64) -> DmcChannel {
    DmcChannel::from_rows(&[vec![1.0 - p, p], vec![p, 1.0 - p]]).unwrap()
}

pub(crate) fn bec(eps: f64) -> DmcChannel {
    DmcChannel::from_rows(&[vec![1.0 - eps, eps, 0.0], vec![0.0, eps, 1.0 - eps]]).unwrap()
}

/// Dense random channel with strictly positive entries.
pub(crate) fn random_channel(m: usize, l: usize, seed: u64) -> DmcChannel {
    let mut rng = crate::rng::stream(seed, 0);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let raw: Vec<f64> = (0..l).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / s).collect()
        })
        .collect();
    DmcChannel::from_rows(&rows).unwrap()
}
