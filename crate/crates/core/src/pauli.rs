//! Phase-tracked Pauli strings over `n` qubits.
//!
//! An operator is stored as `i^phase · σ(x₀,z₀) ⊗ σ(x₁,z₁) ⊗ …` where
//! `σ(0,0) = I`, `σ(1,0) = X`, `σ(0,1) = Z` and `σ(1,1) = Y`. Because `Y` is
//! itself Hermitian, a physically valid stabilizer generator has phase `0` or
//! `2`. The convention `Y = i·X·Z` fixes all product phases.

use std::fmt;

use crate::error::{Error, Result};

pub(crate) const WORD: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Exponent `k` (mod 4) in `a·b = i^k σ(a⊕b)` for single-qubit Paulis,
/// word-parallel: returns (plus mask, minus mask).
#[inline]
pub(crate) fn product_phase_masks(ax: u64, az: u64, bx: u64, bz: u64) -> (u64, u64) {
    let a_x = ax & !az;
    let a_y = ax & az;
    let a_z = !ax & az;
    let b_x = bx & !bz;
    let b_y = bx & bz;
    let b_z = !bx & bz;
    let plus = (a_x & b_y) | (a_y & b_z) | (a_z & b_x);
    let minus = (a_x & b_z) | (a_y & b_x) | (a_z & b_y);
    (plus, minus)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self { n, x: vec![0; w], z: vec![0; w], phase: 0 }
    }

    /// Single-qubit Pauli `p` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut op = Self::identity(n);
        op.set(qubit, p);
        op
    }

    pub fn from_paulis(paulis: &[Pauli]) -> Self {
        let mut op = Self::identity(paulis.len());
        for (j, &p) in paulis.iter().enumerate() {
            op.set(j, p);
        }
        op
    }

    /// Parses strings such as `"+XIZ"`, `"-YY"`, `"iX"`, `"-iZ"`; qubit 0 is
    /// the leftmost letter.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else {
            (0, s)
        };
        let mut paulis = Vec::with_capacity(body.len());
        for c in body.chars() {
            paulis.push(match c {
                'I' | '_' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::Parse(format!("invalid Pauli letter {other:?} in {s:?}"))),
            });
        }
        let mut op = Self::from_paulis(&paulis);
        op.phase = phase;
        Ok(op)
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Phase exponent `k` of the overall factor `i^k`.
    #[inline]
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    /// Multiplies by `-1` when `flip` is set.
    pub fn negated_if(mut self, flip: bool) -> Self {
        if flip {
            self.phase = (self.phase + 2) & 3;
        }
        self
    }

    /// True when the overall factor is `±1`.
    #[inline]
    pub fn is_hermitian(&self) -> bool {
        self.phase & 1 == 0
    }

    #[inline]
    pub fn get(&self, qubit: usize) -> Pauli {
        let (w, b) = (qubit / WORD, qubit % WORD);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    #[inline]
    pub fn set(&mut self, qubit: usize, p: Pauli) {
        assert!(qubit < self.n, "qubit {qubit} out of range for {} qubits", self.n);
        let (w, b) = (qubit / WORD, qubit % WORD);
        let (px, pz) = p.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((px as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((pz as u64) << b);
    }

    pub(crate) fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub(crate) fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Qubits on which the operator acts non-trivially.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&j| self.get(j) != Pauli::I).collect()
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(x, z)| (x | z).count_ones() as usize).sum()
    }

    fn check_width(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::WidthMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    /// Operator product `self · other` with exact phase.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_width(other)?;
        let mut k = self.phase as i64 + other.phase as i64;
        let mut x = Vec::with_capacity(self.x.len());
        let mut z = Vec::with_capacity(self.z.len());
        for w in 0..self.x.len() {
            let (plus, minus) = product_phase_masks(self.x[w], self.z[w], other.x[w], other.z[w]);
            k += plus.count_ones() as i64 - minus.count_ones() as i64;
            x.push(self.x[w] ^ other.x[w]);
            z.push(self.z[w] ^ other.z[w]);
        }
        Ok(Self { n: self.n, x, z, phase: k.rem_euclid(4) as u8 })
    }

    /// Symplectic inner product test.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_width(other)?;
        let mut parity = 0u32;
        for w in 0..self.x.len() {
            parity ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones() & 1;
        }
        Ok(parity == 0)
    }

    /// Same Pauli string ignoring the phase.
    pub fn same_string(&self, other: &Self) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    /// Restriction to a list of qubits (in the given order); phase kept.
    pub fn restrict(&self, qubits: &[usize]) -> Self {
        let mut out = Self::identity(qubits.len());
        for (k, &q) in qubits.iter().enumerate() {
            out.set(k, self.get(q));
        }
        out.phase = self.phase;
        out
    }

    /// Embeds into a wider register, placing qubit `k` of `self` at `map[k]`.
    pub fn embed(&self, n: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.n);
        let mut out = Self::identity(n);
        for (k, &q) in map.iter().enumerate() {
            out.set(q, self.get(k));
        }
        out.phase = self.phase;
        out
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for j in 0..self.n {
            write!(f, "{}", self.get(j).symbol())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOperator({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    type M2 = [[C; 2]; 2];

    fn mat(p: Pauli) -> M2 {
        let o = C::new(0.0, 0.0);
        let l = C::new(1.0, 0.0);
        let i = C::new(0.0, 1.0);
        match p {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    /// Dense matrix of a Pauli string (qubit 0 = least significant index bit).
    fn dense(op: &PauliOperator) -> Vec<Vec<C>> {
        let n = op.num_qubits();
        let d = 1usize << n;
        let ph = [C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(-1.0, 0.0), C::new(0.0, -1.0)][op.phase() as usize];
        let mut m = vec![vec![C::new(0.0, 0.0); d]; d];
        for r in 0..d {
            for c in 0..d {
                let mut v = ph;
                for j in 0..n {
                    v *= mat(op.get(j))[(r >> j) & 1][(c >> j) & 1];
                }
                m[r][c] = v;
            }
        }
        m
    }

    fn matmul(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
        let d = a.len();
        let mut out = vec![vec![C::new(0.0, 0.0); d]; d];
        for i in 0..d {
            for k in 0..d {
                for j in 0..d {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    fn close(a: &[Vec<C>], b: &[Vec<C>]) -> bool {
        a.iter().flatten().zip(b.iter().flatten()).all(|(u, v)| (u - v).norm() < 1e-12)
    }

    fn all_ops(n: usize) -> Vec<PauliOperator> {
        let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        let mut out = Vec::new();
        for code in 0..4usize.pow(n as u32) {
            let ps: Vec<Pauli> = (0..n).map(|j| letters[(code >> (2 * j)) & 3]).collect();
            for phase in 0..4 {
                out.push(PauliOperator::from_paulis(&ps).with_phase(phase));
            }
        }
        out
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let x = PauliOperator::parse("X").unwrap();
        let z = PauliOperator::parse("Z").unwrap();
        let p = x.product(&z).unwrap();
        assert_eq!(p.get(0), Pauli::Y);
        assert_eq!(p.phase(), 3);
    }

    #[test]
    fn x_squared_is_identity() {
        let x = PauliOperator::parse("X").unwrap();
        let p = x.product(&x).unwrap();
        assert!(p.is_identity());
        assert_eq!(p.phase(), 0);
    }

    #[test]
    fn two_qubit_product_matches_matrices() {
        let a = PauliOperator::parse("XZ").unwrap();
        let b = PauliOperator::parse("ZZ").unwrap();
        let p = a.product(&b).unwrap();
        assert_eq!(p, PauliOperator::parse("-iYI").unwrap());
        assert!(close(&dense(&p), &matmul(&dense(&a), &dense(&b))));
    }

    #[test]
    fn product_matches_dense_for_all_two_qubit_pairs() {
        let ops = all_ops(2);
        for a in ops.iter().step_by(3) {
            for b in ops.iter().step_by(5) {
                let p = a.product(b).unwrap();
                assert!(close(&dense(&p), &matmul(&dense(a), &dense(b))), "{a} · {b}");
            }
        }
    }

    #[test]
    fn commutation_matches_dense_exhaustively() {
        let ops: Vec<_> = all_ops(2).into_iter().filter(|o| o.phase() == 0).collect();
        for a in &ops {
            for b in &ops {
                let ab = matmul(&dense(a), &dense(b));
                let ba = matmul(&dense(b), &dense(a));
                assert_eq!(a.commutes(b).unwrap(), close(&ab, &ba), "{a} vs {b}");
            }
        }
        let x = PauliOperator::parse("X").unwrap();
        let z = PauliOperator::parse("Z").unwrap();
        assert!(!x.commutes(&z).unwrap());
        let xx = PauliOperator::parse("XX").unwrap();
        let zz = PauliOperator::parse("ZZ").unwrap();
        assert!(xx.commutes(&zz).unwrap());
    }

    #[test]
    fn random_commutation_against_dense_up_to_six_qubits() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        for _ in 0..500 {
            let n = rng.gen_range(1..=6);
            let a: Vec<Pauli> = (0..n).map(|_| letters[rng.gen_range(0..4)]).collect();
            let b: Vec<Pauli> = (0..n).map(|_| letters[rng.gen_range(0..4)]).collect();
            let (a, b) = (PauliOperator::from_paulis(&a), PauliOperator::from_paulis(&b));
            let ab = matmul(&dense(&a), &dense(&b));
            let ba = matmul(&dense(&b), &dense(&a));
            assert_eq!(a.commutes(&b).unwrap(), close(&ab, &ba));
        }
    }

    #[test]
    fn associativity_is_exhaustive_on_one_qubit_and_sampled_on_three() {
        let ops = all_ops(1);
        for a in &ops {
            for b in &ops {
                for c in &ops {
                    let l = a.product(b).unwrap().product(c).unwrap();
                    let r = a.product(&b.product(c).unwrap()).unwrap();
                    assert_eq!(l, r);
                }
            }
        }
        let ops3 = all_ops(3);
        for a in ops3.iter().step_by(7) {
            for b in ops3.iter().step_by(11) {
                for c in ops3.iter().step_by(13) {
                    let l = a.product(b).unwrap().product(c).unwrap();
                    let r = a.product(&b.product(c).unwrap()).unwrap();
                    assert_eq!(l, r);
                }
            }
        }
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let a = PauliOperator::identity(2);
        let b = PauliOperator::identity(3);
        assert!(matches!(a.product(&b), Err(Error::WidthMismatch { .. })));
        assert!(a.commutes(&b).is_err());
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["+XIZ", "-YY", "+iX", "-iZZ"] {
            assert_eq!(PauliOperator::parse(s).unwrap().to_string(), s);
        }
        assert!(PauliOperator::parse("XQ").is_err());
    }

    #[test]
    fn words_span_multiple_limbs() {
        let mut a = PauliOperator::identity(130);
        a.set(129, Pauli::X);
        a.set(3, Pauli::Z);
        let b = PauliOperator::single(130, 129, Pauli::Z);
        assert!(!a.commutes(&b).unwrap());
        assert_eq!(a.support(), vec![3, 129]);
        assert_eq!(a.weight(), 2);
    }
}
