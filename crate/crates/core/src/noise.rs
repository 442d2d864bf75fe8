//! I.i.d. depolarizing noise and counter-based per-shot randomness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliVector};
use crate::scalar::Real;

/// Quaternary distribution ordered `(I, X, Y, Z)`.
pub type Quaternary<T> = [T; 4];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepolarizingChannel {
    epsilon: f64,
}

impl DepolarizingChannel {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) || !epsilon.is_finite() {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(DepolarizingChannel { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `(1 - eps, eps/3, eps/3, eps/3)`.
    pub fn prior<T: Real>(&self) -> Quaternary<T> {
        let e = self.epsilon / 3.0;
        [T::of(1.0 - self.epsilon), T::of(e), T::of(e), T::of(e)]
    }

    pub fn sample_error(&self, n: usize, seed: ShotSeed) -> PauliVector {
        let mut rng = seed.rng();
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with<R: Rng>(&self, n: usize, rng: &mut R) -> PauliVector {
        let eps = self.epsilon;
        let ops = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                if u < eps {
                    // Reuse the uniform draw: u / eps is uniform on [0, 1).
                    let k = ((u / eps) * 3.0) as usize;
                    [Pauli::X, Pauli::Y, Pauli::Z][k.min(2)]
                } else {
                    Pauli::I
                }
            })
            .collect();
        PauliVector::from_paulis(ops)
    }
}

/// `(master seed, shot index)`; each pair selects an independent ChaCha stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ShotSeed {
    pub master: u64,
    pub index: u64,
}

impl ShotSeed {
    pub fn new(master: u64, index: u64) -> Self {
        ShotSeed { master, index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.index);
        rng
    }
}
