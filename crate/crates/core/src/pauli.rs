//! Phase-free Pauli algebra in symplectic and GF(4) form, sparse check matrices
//! and syndromes.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::{Add, Mul};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Single-qubit Pauli operator with phases discarded.
///
/// The discriminant doubles as the index used for quaternary distributions,
/// which are always ordered `(I, X, Y, Z)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Pauli {
    #[default]
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// X component of the symplectic pair.
    #[inline]
    pub fn x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    /// Z component of the symplectic pair.
    #[inline]
    pub fn z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i]
    }

    /// Symplectic product: `true` iff `self` and `other` anticommute.
    #[inline]
    pub fn anticommutes(self, other: Pauli) -> bool {
        (self.x() & other.z()) ^ (self.z() & other.x())
    }

    #[inline]
    pub fn symplectic_product(self, other: Pauli) -> u8 {
        self.anticommutes(other) as u8
    }

    pub fn to_gf4(self) -> Gf4 {
        Gf4::from_symplectic(self.x(), self.z())
    }

    pub fn from_gf4(g: Gf4) -> Pauli {
        let (x, z) = g.symplectic();
        Pauli::from_bits(x, z)
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

impl Mul for Pauli {
    type Output = Pauli;

    #[inline]
    fn mul(self, rhs: Pauli) -> Pauli {
        Pauli::from_bits(self.x() ^ rhs.x(), self.z() ^ rhs.z())
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Element of GF(4) = {0, 1, w, w^2}, with w^2 = w + 1 (written w̄).
///
/// Stored in the symplectic basis `x*w + z*w̄`, so addition is XOR and the
/// Pauli correspondence is I<->0, X<->w, Z<->w̄, Y<->1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gf4(u8);

impl Gf4 {
    pub const ZERO: Gf4 = Gf4(0b00);
    pub const OMEGA: Gf4 = Gf4(0b10);
    pub const OMEGA_BAR: Gf4 = Gf4(0b01);
    pub const ONE: Gf4 = Gf4(0b11);

    pub fn from_symplectic(x: bool, z: bool) -> Gf4 {
        Gf4(((x as u8) << 1) | z as u8)
    }

    pub fn symplectic(self) -> (bool, bool) {
        (self.0 & 0b10 != 0, self.0 & 0b01 != 0)
    }

    // Discrete log base w of a nonzero element.
    fn log(self) -> u8 {
        match self {
            Gf4::ONE => 0,
            Gf4::OMEGA => 1,
            Gf4::OMEGA_BAR => 2,
            _ => unreachable!("log of zero"),
        }
    }

    fn exp(e: u8) -> Gf4 {
        [Gf4::ONE, Gf4::OMEGA, Gf4::OMEGA_BAR][(e % 3) as usize]
    }

    /// Frobenius conjugate `a^2`.
    pub fn conj(self) -> Gf4 {
        self * self
    }

    /// Absolute trace `a + a^2`, which lies in GF(2).
    pub fn trace(self) -> u8 {
        match self + self.conj() {
            Gf4::ZERO => 0,
            Gf4::ONE => 1,
            other => unreachable!("trace left GF(2): {other:?}"),
        }
    }
}

impl Add for Gf4 {
    type Output = Gf4;

    fn add(self, rhs: Gf4) -> Gf4 {
        Gf4(self.0 ^ rhs.0)
    }
}

impl Mul for Gf4 {
    type Output = Gf4;

    fn mul(self, rhs: Gf4) -> Gf4 {
        if self == Gf4::ZERO || rhs == Gf4::ZERO {
            return Gf4::ZERO;
        }
        Gf4::exp(self.log() + rhs.log())
    }
}

/// n-qubit Pauli operator, phases discarded.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliVector {
    ops: Vec<Pauli>,
}

impl PauliVector {
    pub fn identity(n: usize) -> Self {
        PauliVector {
            ops: vec![Pauli::I; n],
        }
    }

    pub fn from_paulis(ops: Vec<Pauli>) -> Self {
        PauliVector { ops }
    }

    /// Builds from the binary symplectic form `(x | z)`.
    pub fn from_symplectic(x: &[bool], z: &[bool]) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::Dimension {
                what: "symplectic halves",
                expected: x.len(),
                got: z.len(),
            });
        }
        Ok(PauliVector {
            ops: x
                .iter()
                .zip(z)
                .map(|(&a, &b)| Pauli::from_bits(a, b))
                .collect(),
        })
    }

    /// Operator acting as `p` on each listed qubit and identity elsewhere.
    pub fn from_support(n: usize, qubits: &[usize], p: Pauli) -> Self {
        let mut v = PauliVector::identity(n);
        for &q in qubits {
            v.ops[q] = p;
        }
        v
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> Pauli {
        self.ops[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, p: Pauli) {
        self.ops[i] = p;
    }

    /// Multiplies qubit `i` by `p` in place.
    #[inline]
    pub fn apply(&mut self, i: usize, p: Pauli) {
        self.ops[i] = self.ops[i] * p;
    }

    pub fn as_slice(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn iter(&self) -> impl Iterator<Item = Pauli> + '_ {
        self.ops.iter().copied()
    }

    pub fn x_bits(&self) -> Vec<bool> {
        self.ops.iter().map(|p| p.x()).collect()
    }

    pub fn z_bits(&self) -> Vec<bool> {
        self.ops.iter().map(|p| p.z()).collect()
    }

    pub fn weight(&self) -> usize {
        self.ops.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|&p| p == Pauli::I)
    }

    /// Phase-free product (XOR of the symplectic forms).
    pub fn mul(&self, other: &PauliVector) -> Result<PauliVector> {
        check_len("pauli product", self.len(), other.len())?;
        Ok(PauliVector {
            ops: self.ops.iter().zip(&other.ops).map(|(&a, &b)| a * b).collect(),
        })
    }

    /// `true` iff the two operators anticommute.
    pub fn anticommutes(&self, other: &PauliVector) -> Result<bool> {
        check_len("symplectic product", self.len(), other.len())?;
        Ok(self
            .ops
            .iter()
            .zip(&other.ops)
            .fold(false, |acc, (&a, &b)| acc ^ a.anticommutes(b)))
    }

    /// Dense binary row `(x | z)` packed into 64-bit words.
    pub fn to_binary_row(&self) -> Vec<u64> {
        let n = self.len();
        let mut row = vec![0u64; (2 * n).div_ceil(64)];
        for (i, p) in self.ops.iter().enumerate() {
            if p.x() {
                row[i / 64] |= 1 << (i % 64);
            }
            if p.z() {
                let j = n + i;
                row[j / 64] |= 1 << (j % 64);
            }
        }
        row
    }
}

impl fmt::Display for PauliVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.ops {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| {
                Pauli::from_char(c).ok_or_else(|| Error::Parse {
                    line: 1,
                    msg: format!("unexpected character {c:?} in Pauli string"),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliVector::from_paulis)
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension {
            what,
            expected,
            got,
        });
    }
    Ok(())
}

/// Measurement outcomes, one bit per check row (0 = satisfied, 1 = defect).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Syndrome {
    bits: Vec<u8>,
}

impl Syndrome {
    pub fn zeros(m: usize) -> Self {
        Syndrome { bits: vec![0; m] }
    }

    pub fn from_bits(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Syndrome { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, j: usize) -> u8 {
        self.bits[j]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn xor(&self, other: &Syndrome) -> Result<Syndrome> {
        check_len("syndrome xor", self.len(), other.len())?;
        Ok(Syndrome {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// Row restriction, e.g. the standard-check prefix of an overcomplete syndrome.
    pub fn prefix(&self, m: usize) -> Syndrome {
        Syndrome {
            bits: self.bits[..m].to_vec(),
        }
    }

    /// Hex bitstring: hex digit `k` holds bits `4k..4k+4`, most significant first.
    pub fn to_hex(&self) -> String {
        self.bits
            .chunks(4)
            .map(|c| {
                let mut nib = 0u32;
                for (i, &b) in c.iter().enumerate() {
                    nib |= (b as u32) << (3 - i);
                }
                char::from_digit(nib, 16).unwrap()
            })
            .collect()
    }

    /// Inverse of [`Syndrome::to_hex`]; `m` trims the padding of the last digit.
    pub fn from_hex(hex: &str, m: usize) -> Result<Syndrome> {
        let hex = hex.trim();
        if hex.len() != m.div_ceil(4) {
            return Err(Error::Parse {
                line: 1,
                msg: format!(
                    "syndrome hex has {} digits, {} rows need {}",
                    hex.len(),
                    m,
                    m.div_ceil(4)
                ),
            });
        }
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for c in hex.chars() {
            let nib = c.to_digit(16).ok_or_else(|| Error::Parse {
                line: 1,
                msg: format!("bad hex digit {c:?}"),
            })?;
            for i in 0..4 {
                bits.push(((nib >> (3 - i)) & 1) as u8);
            }
        }
        if bits[m..].iter().any(|&b| b != 0) {
            return Err(Error::Parse {
                line: 1,
                msg: "nonzero padding bits in syndrome hex".into(),
            });
        }
        bits.truncate(m);
        Ok(Syndrome { bits })
    }
}

/// Sparse stabilizer matrix over GF(4): each row lists `(qubit, Pauli)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseCheckMatrix {
    n: usize,
    rows: Vec<Vec<(usize, Pauli)>>,
}

impl SparseCheckMatrix {
    /// Validates and sorts each row.
    pub fn new(n: usize, mut rows: Vec<Vec<(usize, Pauli)>>) -> Result<Self> {
        for (j, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(q, _)| q);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::Invariant(format!(
                        "row {j} has duplicate qubit {}",
                        w[0].0
                    )));
                }
            }
            for &(q, p) in row.iter() {
                if q >= n {
                    return Err(Error::Invariant(format!(
                        "row {j} references qubit {q} >= n = {n}"
                    )));
                }
                if p == Pauli::I {
                    return Err(Error::Invariant(format!(
                        "row {j} stores an identity entry at qubit {q}"
                    )));
                }
            }
        }
        Ok(SparseCheckMatrix { n, rows })
    }

    pub fn from_pauli_vectors(n: usize, vs: &[PauliVector]) -> Result<Self> {
        let rows = vs
            .iter()
            .map(|v| {
                check_len("check row", n, v.len())?;
                Ok(v.iter()
                    .enumerate()
                    .filter(|(_, p)| *p != Pauli::I)
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        SparseCheckMatrix::new(n, rows)
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<(usize, Pauli)>] {
        &self.rows
    }

    pub fn row(&self, j: usize) -> &[(usize, Pauli)] {
        &self.rows[j]
    }

    /// Total number of Tanner-graph edges (nonzero entries).
    pub fn num_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row_vector(&self, j: usize) -> PauliVector {
        let mut v = PauliVector::identity(self.n);
        for &(q, p) in &self.rows[j] {
            v.set(q, p);
        }
        v
    }

    /// Column adjacency: for each qubit, `(row, position within row)` pairs.
    pub fn column_adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut cols = vec![Vec::new(); self.n];
        for (j, row) in self.rows.iter().enumerate() {
            for (pos, &(q, _)) in row.iter().enumerate() {
                cols[q].push((j, pos));
            }
        }
        cols
    }

    pub fn syndrome(&self, e: &PauliVector) -> Result<Syndrome> {
        check_len("syndrome", self.n, e.len())?;
        Ok(Syndrome {
            bits: self
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .fold(0u8, |acc, &(q, p)| acc ^ p.symplectic_product(e.get(q)))
                })
                .collect(),
        })
    }

    pub fn commutes_with_all(&self, v: &PauliVector) -> Result<bool> {
        Ok(self.syndrome(v)?.is_zero())
    }

    /// Rank of the binary `(x | z)` form over GF(2).
    pub fn symplectic_rank(&self) -> usize {
        let rows: Vec<Vec<u64>> = (0..self.num_rows())
            .map(|j| self.row_vector(j).to_binary_row())
            .collect();
        gf2_rank(rows)
    }

    /// Sparse text format: header `m n`, then one row per line of `qubit:pauli` tokens.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.num_rows(), self.n)?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|(q, p)| format!("{q}:{p}")).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let (m, n) = loop {
            let Some((i, line)) = lines.next() else {
                return Err(Error::Parse {
                    line: 1,
                    msg: "missing `m n` header".into(),
                });
            };
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: format!("bad header field {s:?}: {e}"),
                })
            };
            if parts.len() != 2 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "header must be `m n`".into(),
                });
            }
            break (parse(parts[0])?, parse(parts[1])?);
        };
        let mut rows = Vec::with_capacity(m);
        for (i, line) in lines {
            let line = line?;
            if rows.len() == m {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("more than {m} rows"),
                });
            }
            let mut row = Vec::new();
            for tok in line.split_whitespace() {
                let bad = || Error::Parse {
                    line: i + 1,
                    msg: format!("bad entry {tok:?}, expected qubit:pauli"),
                };
                let (q, p) = tok.split_once(':').ok_or_else(bad)?;
                let q: usize = q.parse().map_err(|_| bad())?;
                let mut cs = p.chars();
                let p = match (cs.next().and_then(Pauli::from_char), cs.next()) {
                    (Some(p), None) if p != Pauli::I => p,
                    _ => return Err(bad()),
                };
                row.push((q, p));
            }
            rows.push(row);
        }
        if rows.len() != m {
            return Err(Error::Parse {
                line: rows.len() + 2,
                msg: format!("expected {m} rows, found {}", rows.len()),
            });
        }
        SparseCheckMatrix::new(n, rows)
    }
}

/// Rank over GF(2) of bit-packed rows (consumed).
pub fn gf2_rank(mut rows: Vec<Vec<u64>>) -> usize {
    let Some(words) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut rank = 0;
    for col in 0..words * 64 {
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & bit != 0 {
                for (a, b) in row.iter_mut().zip(&pivot_row) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pauli() -> impl Strategy<Value = Pauli> {
        (0usize..4).prop_map(Pauli::from_index)
    }

    fn pauli_vec(n: usize) -> impl Strategy<Value = PauliVector> {
        proptest::collection::vec(pauli(), n).prop_map(PauliVector::from_paulis)
    }

    #[test]
    fn symplectic_product_examples() {
        assert_eq!(Pauli::X.symplectic_product(Pauli::Z), 1);
        assert_eq!(Pauli::I.symplectic_product(Pauli::Y), 0);
        assert_eq!(Pauli::Y.symplectic_product(Pauli::Y), 0);
    }

    #[test]
    fn gf4_correspondence() {
        assert_eq!(Pauli::I.to_gf4(), Gf4::ZERO);
        assert_eq!(Pauli::X.to_gf4(), Gf4::OMEGA);
        assert_eq!(Pauli::Z.to_gf4(), Gf4::OMEGA_BAR);
        assert_eq!(Pauli::Y.to_gf4(), Gf4::ONE);
        assert_eq!(Gf4::OMEGA + Gf4::OMEGA_BAR, Gf4::ONE);
        assert_eq!(Gf4::OMEGA * Gf4::OMEGA, Gf4::OMEGA_BAR);
        for p in Pauli::ALL {
            assert_eq!(Pauli::from_gf4(p.to_gf4()), p);
            assert_eq!(Pauli::from_bits(p.x(), p.z()), p);
        }
    }

    #[test]
    fn symplectic_product_is_trace_form() {
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let t = (a.to_gf4() * b.to_gf4().conj()).trace();
                assert_eq!(t, a.symplectic_product(b), "{a} {b}");
            }
        }
    }

    #[test]
    fn pauli_mul_examples() {
        let a: PauliVector = "XI".parse().unwrap();
        let b: PauliVector = "ZI".parse().unwrap();
        assert_eq!(a.mul(&b).unwrap().to_string(), "YI");
        assert!(a.mul(&a).unwrap().is_identity());
        assert!(a.mul(&PauliVector::identity(3)).is_err());
    }

    #[test]
    fn syndrome_of_identity_is_zero() {
        let h = SparseCheckMatrix::new(3, vec![vec![(0, Pauli::X), (1, Pauli::X)]]).unwrap();
        assert!(h.syndrome(&PauliVector::identity(3)).unwrap().is_zero());
        assert!(h.syndrome(&PauliVector::identity(2)).is_err());
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(SparseCheckMatrix::new(2, vec![vec![(0, Pauli::X), (0, Pauli::Z)]]).is_err());
        assert!(SparseCheckMatrix::new(2, vec![vec![(2, Pauli::X)]]).is_err());
        assert!(SparseCheckMatrix::new(2, vec![vec![(1, Pauli::I)]]).is_err());
    }

    #[test]
    fn text_format_roundtrip_and_errors() {
        let h = SparseCheckMatrix::new(
            4,
            vec![
                vec![(0, Pauli::X), (3, Pauli::Y)],
                vec![(1, Pauli::Z), (2, Pauli::Z)],
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        h.write_text(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "2 4\n0:X 3:Y\n1:Z 2:Z\n");
        assert_eq!(SparseCheckMatrix::read_text(&buf[..]).unwrap(), h);
        assert!(SparseCheckMatrix::read_text("2 4\n0:X\n".as_bytes()).is_err());
        assert!(SparseCheckMatrix::read_text("1 4\n0:Q\n".as_bytes()).is_err());
        assert!(SparseCheckMatrix::read_text("1 4\n0:I\n".as_bytes()).is_err());
    }

    #[test]
    fn hex_roundtrip() {
        let s = Syndrome::from_bits(vec![1, 0, 1, 1, 0, 1]);
        assert_eq!(s.to_hex(), "b4");
        assert_eq!(Syndrome::from_hex("b4", 6).unwrap(), s);
        assert!(Syndrome::from_hex("b5", 6).is_err());
        assert!(Syndrome::from_hex("b", 6).is_err());
    }

    #[test]
    fn rank_small() {
        let rows = vec![vec![0b011u64], vec![0b110], vec![0b101]];
        assert_eq!(gf2_rank(rows), 2);
        assert_eq!(gf2_rank(vec![]), 0);
    }

    proptest! {
        #[test]
        fn symplectic_product_symmetric(a in pauli(), b in pauli()) {
            prop_assert_eq!(a.symplectic_product(b), b.symplectic_product(a));
        }

        #[test]
        fn syndrome_is_linear(e1 in pauli_vec(8), e2 in pauli_vec(8), rows in proptest::collection::vec(pauli_vec(8), 1..6)) {
            let h = SparseCheckMatrix::from_pauli_vectors(8, &rows).unwrap();
            let s12 = h.syndrome(&e1.mul(&e2).unwrap()).unwrap();
            let s = h.syndrome(&e1).unwrap().xor(&h.syndrome(&e2).unwrap()).unwrap();
            prop_assert_eq!(s12, s);
        }

        #[test]
        fn product_weight_subadditive(a in pauli_vec(10), b in pauli_vec(10)) {
            prop_assert!(a.mul(&b).unwrap().weight() <= a.weight() + b.weight());
        }
    }
}
