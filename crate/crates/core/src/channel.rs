//! Depolarizing noise, Pauli errors in symplectic form, and syndromes.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::code::QuantumQcCode;
use crate::error::{Error, Result};
use crate::gf2::{mat_vec_mod2, BitVector, SparseBinaryMatrix};

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `(x, z)` bits; `Y` sets both.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

/// An n-qubit Pauli error as an `(x, z)` bit-vector pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliError {
    pub x: BitVector,
    pub z: BitVector,
}

impl PauliError {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
        }
    }

    pub fn new(x: BitVector, z: BitVector) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::invalid(format!(
                "x has length {} but z has length {}",
                x.len(),
                z.len()
            )));
        }
        Ok(Self { x, z })
    }

    pub fn single(n: usize, qubit: usize, pauli: Pauli) -> Self {
        let mut e = Self::identity(n);
        e.set(qubit, pauli);
        e
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x.get(qubit), self.z.get(qubit))
    }

    pub fn set(&mut self, qubit: usize, pauli: Pauli) {
        let (x, z) = pauli.bits();
        self.x.set(qubit, x);
        self.z.set(qubit, z);
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        self.x.union_weight(&self.z)
    }

    pub fn xor(&self, other: &PauliError) -> PauliError {
        PauliError {
            x: &self.x ^ &other.x,
            z: &self.z ^ &other.z,
        }
    }
}

/// Per-qubit probabilities of I, X, Z, Y.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointPrior {
    pub p_i: f64,
    pub p_x: f64,
    pub p_z: f64,
    pub p_y: f64,
}

impl JointPrior {
    pub fn marginal_x(&self) -> f64 {
        self.p_x + self.p_y
    }

    pub fn marginal_z(&self) -> f64 {
        self.p_z + self.p_y
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

pub fn depolarizing_prior(p_d: f64) -> Result<JointPrior> {
    check_probability(p_d)?;
    let each = p_d / 3.0;
    Ok(JointPrior {
        p_i: 1.0 - p_d,
        p_x: each,
        p_z: each,
        p_y: each,
    })
}

/// I.i.d. depolarizing error: identity with probability `1 - p_d`, else X, Y
/// or Z uniformly.
pub fn sample_error<R: Rng + ?Sized>(n: usize, p_d: f64, rng: &mut R) -> Result<PauliError> {
    check_probability(p_d)?;
    let mut e = PauliError::identity(n);
    if p_d == 0.0 {
        return Ok(e);
    }
    for q in 0..n {
        if rng.gen::<f64>() < p_d {
            let pauli = match rng.gen_range(0..3u8) {
                0 => Pauli::X,
                1 => Pauli::Y,
                _ => Pauli::Z,
            };
            e.set(q, pauli);
        }
    }
    Ok(e)
}

/// Random stream for one Monte Carlo trial.
///
/// The ChaCha key holds `(seed, point)` and the stream id is the trial index,
/// so the stream depends only on those three values.
pub fn trial_rng(seed: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&point.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

/// `(s, t) = (H_Z x, H_X z)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Syndrome {
    pub s: BitVector,
    pub t: BitVector,
}

impl Syndrome {
    pub fn compute(h_x: &SparseBinaryMatrix, h_z: &SparseBinaryMatrix, e: &PauliError) -> Result<Self> {
        if e.x.len() != h_z.cols() || e.z.len() != h_x.cols() {
            return Err(Error::invalid(format!(
                "error has length {} but code length is {}",
                e.len(),
                h_z.cols()
            )));
        }
        Ok(Self {
            s: mat_vec_mod2(h_z, &e.x)?,
            t: mat_vec_mod2(h_x, &e.z)?,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.s.is_zero() && self.t.is_zero()
    }
}

pub fn extract_syndrome(code: &QuantumQcCode, e: &PauliError) -> Result<Syndrome> {
    Syndrome::compute(code.h_x(), code.h_z(), e)
}
