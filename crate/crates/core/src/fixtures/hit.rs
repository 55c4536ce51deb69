// SPDX-License-Identifier: Apache-2.0
//! Hit stimuli and the functional reference for the example system.

use std::collections::BTreeMap;

use rand::Rng;

use crate::scalar::Scalar;
use crate::simulator::{SourceInfo, Stimulus};

use super::{Ex1Params, FixtureError};

/// Integer charge units per unit of deposited charge.
pub const CHARGE_SCALE: f64 = 1000.0;

/// A particle hit: total charge spread with a Gaussian profile of width
/// `sigma` (in channels) over the `K` channels on each side of the channel
/// nearest `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitStimulus {
    pub center: f64,
    pub charge: f64,
    pub sigma: f64,
}

impl HitStimulus {
    pub fn check(&self, p: &Ex1Params) -> Result<(), FixtureError> {
        if !(self.charge > 0.0 && self.charge.is_finite()) {
            return Err(FixtureError::BadParams(
                "hit charge must be positive".into(),
            ));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(FixtureError::BadParams(
                "hit spread must be positive".into(),
            ));
        }
        let k = p.n_side_chans as f64;
        let hi = p.n_channels as f64 - 1.0 - 2.0 * k;
        if !(self.center >= 2.0 * k && self.center <= hi) {
            return Err(FixtureError::BadParams(format!(
                "hit centre {} outside [{}, {hi}]",
                self.center,
                2.0 * k
            )));
        }
        Ok(())
    }

    /// A random in-range hit.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, p: &Ex1Params) -> Self {
        let k = p.n_side_chans as f64;
        let hi = p.n_channels as f64 - 1.0 - 2.0 * k;
        Self {
            center: rng.gen_range(2.0 * k..=hi),
            charge: rng.gen_range(50.0..500.0),
            sigma: rng.gen_range(0.3..2.5),
        }
    }

    /// Integer per-channel charges.
    pub fn deposit(&self, p: &Ex1Params) -> Result<Vec<i64>, FixtureError> {
        self.check(p)?;
        let k = p.n_side_chans as i64;
        let c0 = self.center.round() as i64;
        let weights: Vec<f64> = (-k..=k)
            .map(|o| {
                let d = (c0 + o) as f64 - self.center;
                (-d * d / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let mut out = vec![0i64; p.n_channels];
        for (o, w) in (-k..=k).zip(weights) {
            out[(c0 + o) as usize] = (self.charge * CHARGE_SCALE * w / total).round() as i64;
        }
        Ok(out)
    }
}

/// Quantities the example system sends out for one hit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitReference<T> {
    pub n_max: usize,
    pub s: T,
    pub s_w: T,
}

impl<T: Scalar> HitReference<T> {
    /// `N_max + S_W / S`, exactly as the interpolation formula is usually
    /// quoted for this system. With absolute channel indices in `S_W` this
    /// lands near `2 * N_max`; see [`HitReference::centroid`].
    pub fn x_as_printed(&self) -> T {
        T::from_index(self.n_max as i64) + self.s_w / self.s
    }

    /// Centre of gravity `S_W / S`, the physical hit position.
    pub fn centroid(&self) -> T {
        self.s_w / self.s
    }

    /// Same quantities in another scalar type.
    pub fn convert<U: Scalar>(&self) -> Option<HitReference<U>> {
        Some(HitReference {
            n_max: self.n_max,
            s: U::from_f64(self.s.to_f64()?)?,
            s_w: U::from_f64(self.s_w.to_f64()?)?,
        })
    }
}

/// Arg-max channel (lowest index on ties), then charge and weighted charge
/// over the `2K+1` window around it.
pub fn reference_from_channels<T: Scalar>(
    p: &Ex1Params,
    channels: &[T],
) -> Result<HitReference<T>, FixtureError> {
    if channels.len() != p.n_channels {
        return Err(FixtureError::BadParams(format!(
            "expected {} channels, got {}",
            p.n_channels,
            channels.len()
        )));
    }
    let mut n_max = 0;
    for (i, v) in channels.iter().enumerate() {
        if *v > channels[n_max] {
            n_max = i;
        }
    }
    let k = p.n_side_chans;
    if n_max < k || n_max + k >= p.n_channels {
        return Err(FixtureError::EdgeHit { n_max });
    }
    let mut s = T::zero();
    let mut s_w = T::zero();
    for (i, &v) in channels
        .iter()
        .enumerate()
        .take(n_max + k + 1)
        .skip(n_max - k)
    {
        s = s + v;
        s_w = s_w + T::from_index(i as i64) * v;
    }
    Ok(HitReference { n_max, s, s_w })
}

pub fn reference_hit<T: Scalar>(
    p: &Ex1Params,
    h: &HitStimulus,
) -> Result<HitReference<T>, FixtureError> {
    let channels: Vec<T> = h.deposit(p)?.into_iter().map(T::from_index).collect();
    reference_from_channels(p, &channels)
}

/// Drives the detector source with idle (all-zero) samples, except at the
/// scheduled cycles where a hit's deposit is presented.
#[derive(Debug, Clone, Default)]
pub struct HitTrain {
    pub hits: BTreeMap<u64, Vec<i64>>,
}

impl HitTrain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, cycle: u64, deposit: Vec<i64>) {
        self.hits.insert(cycle, deposit);
    }
}

impl<T: Scalar> Stimulus<T> for HitTrain {
    fn sample(&mut self, source: &SourceInfo<'_>, cycle: u64) -> Option<Vec<T>> {
        Some(match self.hits.get(&cycle) {
            Some(d) => d.iter().map(|&v| T::from_index(v)).collect(),
            None => vec![T::zero(); source.width],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::TABLE1_CASES;
    use num_rational::Ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> Ex1Params {
        TABLE1_CASES[0]
    }

    #[test]
    fn single_channel_hit() {
        let p = params();
        let mut ch = vec![0i64; p.n_channels];
        ch[20] = 750;
        let r = reference_from_channels(&p, &ch).unwrap();
        assert_eq!(
            r,
            HitReference {
                n_max: 20,
                s: 750,
                s_w: 20 * 750
            }
        );
    }

    #[test]
    fn symmetric_hit_centres_on_its_channel() {
        let p = params();
        let h = HitStimulus {
            center: 30.0,
            charge: 250.0,
            sigma: 1.0,
        };
        let r: HitReference<Ratio<i64>> = reference_hit(&p, &h).unwrap();
        assert_eq!(r.n_max, 30);
        assert_eq!(r.centroid(), Ratio::from_integer(30));
        assert_eq!(r.x_as_printed(), Ratio::from_integer(60));
    }

    #[test]
    fn random_profiles_match_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in TABLE1_CASES {
            for _ in 0..20 {
                let h = HitStimulus::random(&mut rng, &p);
                let dep = h.deposit(&p).unwrap();
                // Direct recomputation, no shared helpers.
                let max = *dep.iter().max().unwrap();
                let n_max = dep.iter().position(|&v| v == max).unwrap();
                let k = p.n_side_chans;
                let s: i64 = dep[n_max - k..=n_max + k].iter().sum();
                let s_w: i64 = (n_max - k..=n_max + k).map(|i| i as i64 * dep[i]).sum();
                let r: HitReference<i64> = reference_hit(&p, &h).unwrap();
                assert_eq!((r.n_max, r.s, r.s_w), (n_max, s, s_w));
                let f: HitReference<f64> = r.convert().unwrap();
                let expect = n_max as f64 + s_w as f64 / s as f64;
                assert!((f.x_as_printed() - expect).abs() <= 1e-12 * expect.abs());
            }
        }
    }

    #[test]
    fn edge_hits_rejected() {
        let p = params();
        let mut ch = vec![0i64; p.n_channels];
        ch[1] = 5;
        assert_eq!(
            reference_from_channels(&p, &ch),
            Err(FixtureError::EdgeHit { n_max: 1 })
        );
        let h = HitStimulus {
            center: 2.0,
            charge: 10.0,
            sigma: 1.0,
        };
        assert!(h.deposit(&p).is_err());
    }
}
