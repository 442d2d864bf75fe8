//! The d x d toric code: lattice indexing, standard and overcomplete check
//! matrices, logical operators, detection graphs and translational edge classes.
//!
//! Indexing convention: qubit `orientation * d^2 + row * d + col`, with
//! horizontal edges (orientation 0) joining vertices `(r, c)` and `(r, c+1)`
//! and vertical edges (orientation 1) joining `(r, c)` and `(r+1, c)`.
//! Vertex check `(r, c)` acts as X on its four incident edges, plaquette
//! `(r, c)` acts as Z on the boundary of the face whose top-left corner is
//! vertex `(r, c)`. Odd `d` is accepted; `d = 2` builds but is degenerate
//! (weight-6 rows collapse).

use std::fmt;

use crate::error::{Error, Result};
use crate::pauli::{gf2_rank, Pauli, PauliVector, SparseCheckMatrix, Syndrome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Horizontal = 0,
    Vertical = 1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QubitCoord {
    pub orientation: Orientation,
    pub row: usize,
    pub col: usize,
}

/// Check families of the overcomplete matrix, in row-block order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckFamily {
    /// Weight-4 X-type star.
    Vertex,
    /// Weight-4 Z-type face.
    Plaquette,
    /// Vertex `(r, c)` times vertex `(r, c+1)`.
    VertexPairH,
    /// Vertex `(r, c)` times vertex `(r+1, c)`.
    VertexPairV,
    /// Plaquette `(r, c)` times plaquette `(r, c+1)`.
    PlaquettePairH,
    /// Plaquette `(r, c)` times plaquette `(r+1, c)`.
    PlaquettePairV,
}

impl CheckFamily {
    pub const ALL: [CheckFamily; 6] = [
        CheckFamily::Vertex,
        CheckFamily::Plaquette,
        CheckFamily::VertexPairH,
        CheckFamily::VertexPairV,
        CheckFamily::PlaquettePairH,
        CheckFamily::PlaquettePairV,
    ];

    pub fn pauli(self) -> Pauli {
        match self {
            CheckFamily::Vertex | CheckFamily::VertexPairH | CheckFamily::VertexPairV => Pauli::X,
            _ => Pauli::Z,
        }
    }

    pub fn weight(self) -> usize {
        match self {
            CheckFamily::Vertex | CheckFamily::Plaquette => 4,
            _ => 6,
        }
    }

    /// First edge-class id of this family; slots follow consecutively.
    pub fn class_base(self) -> usize {
        match self {
            CheckFamily::Vertex => 0,
            CheckFamily::Plaquette => 4,
            CheckFamily::VertexPairH => 8,
            CheckFamily::VertexPairV => 14,
            CheckFamily::PlaquettePairH => 20,
            CheckFamily::PlaquettePairV => 26,
        }
    }

    /// The two weight-4 checks (family, row shift, col shift) whose product this is.
    fn constituents(self) -> Option<(CheckFamily, (isize, isize))> {
        match self {
            CheckFamily::VertexPairH => Some((CheckFamily::Vertex, (0, 1))),
            CheckFamily::VertexPairV => Some((CheckFamily::Vertex, (1, 0))),
            CheckFamily::PlaquettePairH => Some((CheckFamily::Plaquette, (0, 1))),
            CheckFamily::PlaquettePairV => Some((CheckFamily::Plaquette, (1, 0))),
            _ => None,
        }
    }

    /// Support of the check anchored at the origin, in canonical slot order.
    ///
    /// Weight-4 slots are E, W, N, S. Pair slots list the first check's
    /// surviving edges then the second's, each in that check's order.
    pub fn offsets(self) -> Vec<Offset> {
        use Orientation::*;
        let o = |orientation, dr, dc| Offset {
            orientation,
            dr,
            dc,
        };
        match self {
            CheckFamily::Vertex => vec![
                o(Horizontal, 0, 0),
                o(Horizontal, 0, -1),
                o(Vertical, -1, 0),
                o(Vertical, 0, 0),
            ],
            CheckFamily::Plaquette => vec![
                o(Vertical, 0, 1),
                o(Vertical, 0, 0),
                o(Horizontal, 0, 0),
                o(Horizontal, 1, 0),
            ],
            pair => {
                let (base, (sr, sc)) = pair.constituents().unwrap();
                let first = base.offsets();
                let second: Vec<Offset> = base
                    .offsets()
                    .into_iter()
                    .map(|f| Offset {
                        dr: f.dr + sr,
                        dc: f.dc + sc,
                        ..f
                    })
                    .collect();
                let mut out: Vec<Offset> =
                    first.iter().filter(|f| !second.contains(f)).copied().collect();
                out.extend(second.iter().filter(|s| !first.contains(s)));
                out
            }
        }
    }
}

impl fmt::Display for CheckFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CheckFamily::Vertex => "V4",
            CheckFamily::Plaquette => "P4",
            CheckFamily::VertexPairH => "V6-h",
            CheckFamily::VertexPairV => "V6-v",
            CheckFamily::PlaquettePairH => "P6-h",
            CheckFamily::PlaquettePairV => "P6-v",
        };
        f.write_str(s)
    }
}

/// Lattice displacement of an edge relative to a check anchor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Offset {
    pub orientation: Orientation,
    pub dr: isize,
    pub dc: isize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CheckCoord {
    pub family: CheckFamily,
    pub row: usize,
    pub col: usize,
}

/// Number of translation classes of Tanner edges in the overcomplete matrix.
pub const NUM_EDGE_CLASSES: usize = 32;

/// Identifier of the slot convention above; stored in weight files.
pub const CLASS_CONVENTION: &str = "toric-oc-v1:V4[E,W,N,S]P4[E,W,N,S]+pairs(right,down)";

/// Which logical operator (stored order X1, X2, Z1, Z2).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Logical {
    X1 = 0,
    X2 = 1,
    Z1 = 2,
    Z2 = 3,
}

#[derive(Clone, Debug)]
pub struct ToricCode {
    d: usize,
    standard: SparseCheckMatrix,
    overcomplete: SparseCheckMatrix,
    logicals: [PauliVector; 4],
    check_coords: Vec<CheckCoord>,
}

/// Builds the `[[2d^2, 2, d]]` toric code.
pub fn build_toric(d: usize) -> Result<ToricCode> {
    ToricCode::new(d)
}

impl ToricCode {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDistance(d));
        }
        if d < 3 {
            log::warn!("toric code with d = {d} is degenerate");
        }
        let n = 2 * d * d;
        let mut check_coords = Vec::with_capacity(6 * d * d);
        let mut rows = Vec::with_capacity(6 * d * d);
        for family in CheckFamily::ALL {
            for row in 0..d {
                for col in 0..d {
                    let cc = CheckCoord { family, row, col };
                    rows.push(Self::check_vector(d, cc));
                    check_coords.push(cc);
                }
            }
        }
        let overcomplete = SparseCheckMatrix::from_pauli_vectors(n, &rows)?;
        let standard = SparseCheckMatrix::from_pauli_vectors(n, &rows[..2 * d * d])?;

        let line = |o: Orientation, fixed_row: Option<usize>, fixed_col: Option<usize>| {
            (0..d)
                .map(|k| {
                    qubit_index(
                        d,
                        o,
                        fixed_row.unwrap_or(k) as isize,
                        fixed_col.unwrap_or(k) as isize,
                    )
                })
                .collect::<Vec<_>>()
        };
        let logicals = [
            // X1 crosses every horizontal edge of column 0; pairs with Z1.
            PauliVector::from_support(n, &line(Orientation::Horizontal, None, Some(0)), Pauli::X),
            PauliVector::from_support(n, &line(Orientation::Vertical, Some(0), None), Pauli::X),
            // Z1 runs along row 0 of horizontal edges.
            PauliVector::from_support(n, &line(Orientation::Horizontal, Some(0), None), Pauli::Z),
            PauliVector::from_support(n, &line(Orientation::Vertical, None, Some(0)), Pauli::Z),
        ];
        Ok(ToricCode {
            d,
            standard,
            overcomplete,
            logicals,
            check_coords,
        })
    }

    fn check_vector(d: usize, cc: CheckCoord) -> PauliVector {
        let mut v = PauliVector::identity(2 * d * d);
        for off in cc.family.offsets() {
            let q = qubit_index(
                d,
                off.orientation,
                cc.row as isize + off.dr,
                cc.col as isize + off.dc,
            );
            // Multiplying keeps d = 2 collisions consistent with the group product.
            v.apply(q, cc.family.pauli());
        }
        v
    }

    pub fn distance(&self) -> usize {
        self.d
    }

    pub fn num_qubits(&self) -> usize {
        2 * self.d * self.d
    }

    /// Weight-4 checks: `d^2` vertex rows then `d^2` plaquette rows.
    pub fn standard(&self) -> &SparseCheckMatrix {
        &self.standard
    }

    /// Standard rows followed by the `4 d^2` weight-6 products; `3n` rows in total.
    pub fn overcomplete(&self) -> &SparseCheckMatrix {
        &self.overcomplete
    }

    pub fn matrix(&self, kind: MatrixKind) -> &SparseCheckMatrix {
        match kind {
            MatrixKind::Standard => &self.standard,
            MatrixKind::Overcomplete => &self.overcomplete,
        }
    }

    /// Logical generators in the order X1, X2, Z1, Z2.
    pub fn logicals(&self) -> &[PauliVector; 4] {
        &self.logicals
    }

    pub fn logical(&self, which: Logical) -> &PauliVector {
        &self.logicals[which as usize]
    }

    /// Coordinates of overcomplete row `j` (standard rows are the prefix).
    pub fn check_coord(&self, j: usize) -> CheckCoord {
        self.check_coords[j]
    }

    pub fn check_row(&self, cc: CheckCoord) -> usize {
        let block = CheckFamily::ALL
            .iter()
            .position(|&f| f == cc.family)
            .unwrap();
        block * self.d * self.d + cc.row * self.d + cc.col
    }

    pub fn qubit(&self, orientation: Orientation, row: isize, col: isize) -> usize {
        qubit_index(self.d, orientation, row, col)
    }

    pub fn qubit_coord(&self, q: usize) -> QubitCoord {
        let d2 = self.d * self.d;
        QubitCoord {
            orientation: if q < d2 {
                Orientation::Horizontal
            } else {
                Orientation::Vertical
            },
            row: (q % d2) / self.d,
            col: q % self.d,
        }
    }

    /// Qubit reached by translating `q` by `(dr, dc)` lattice steps.
    pub fn translate_qubit(&self, q: usize, dr: isize, dc: isize) -> usize {
        let c = self.qubit_coord(q);
        self.qubit(c.orientation, c.row as isize + dr, c.col as isize + dc)
    }

    /// Overcomplete row reached by translating row `j` by `(dr, dc)`.
    pub fn translate_check(&self, j: usize, dr: isize, dc: isize) -> usize {
        let cc = self.check_coords[j];
        let d = self.d as isize;
        self.check_row(CheckCoord {
            family: cc.family,
            row: (cc.row as isize + dr).rem_euclid(d) as usize,
            col: (cc.col as isize + dc).rem_euclid(d) as usize,
        })
    }

    /// The two standard rows whose product is overcomplete row `j`, if `j` is a pair row.
    pub fn row_constituents(&self, j: usize) -> Option<(usize, usize)> {
        let cc = self.check_coords[j];
        let (base, (dr, dc)) = cc.family.constituents()?;
        let first = self.check_row(CheckCoord { family: base, ..cc });
        Some((first, self.translate_check(first, dr, dc)))
    }

    /// Overcomplete syndrome implied by a standard-matrix syndrome.
    pub fn expand_syndrome(&self, s: &Syndrome) -> Result<Syndrome> {
        let m = self.standard.num_rows();
        if s.len() != m {
            return Err(Error::Dimension {
                what: "standard syndrome",
                expected: m,
                got: s.len(),
            });
        }
        let bits = (0..self.overcomplete.num_rows())
            .map(|j| match self.row_constituents(j) {
                Some((a, b)) => s.get(a) ^ s.get(b),
                None => s.get(j),
            })
            .collect();
        Ok(Syndrome::from_bits(bits))
    }
}

#[inline]
fn qubit_index(d: usize, o: Orientation, row: isize, col: isize) -> usize {
    let di = d as isize;
    let r = row.rem_euclid(di) as usize;
    let c = col.rem_euclid(di) as usize;
    (o as usize) * d * d + r * d + c
}

/// Which check matrix a decoder runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Standard,
    Overcomplete,
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixKind::Standard => "standard",
            MatrixKind::Overcomplete => "overcomplete",
        })
    }
}

/// Translation class of every Tanner edge of the overcomplete matrix.
///
/// `classes[j][pos]` is the class of the edge between row `j` and the
/// qubit at position `pos` of that (qubit-sorted) row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeClassMap {
    classes: Vec<Vec<u8>>,
}

impl EdgeClassMap {
    pub fn num_classes(&self) -> usize {
        NUM_EDGE_CLASSES
    }

    pub fn class_of(&self, row: usize, pos: usize) -> usize {
        self.classes[row][pos] as usize
    }

    pub fn row_classes(&self, row: usize) -> &[u8] {
        &self.classes[row]
    }

    pub fn num_edges(&self) -> usize {
        self.classes.iter().map(Vec::len).sum()
    }

    /// Class ids restricted to the first `rows` rows (the standard matrix is a prefix).
    pub fn truncated(&self, rows: usize) -> EdgeClassMap {
        EdgeClassMap {
            classes: self.classes[..rows].to_vec(),
        }
    }

    /// Flattened per-edge class ids in row-major edge order.
    pub fn flat(&self) -> Vec<usize> {
        self.classes
            .iter()
            .flat_map(|r| r.iter().map(|&c| c as usize))
            .collect()
    }
}

pub fn build_edge_classes(code: &ToricCode) -> Result<EdgeClassMap> {
    if code.d < 3 {
        return Err(Error::InvalidDistance(code.d));
    }
    let h = &code.overcomplete;
    let classes = (0..h.num_rows())
        .map(|j| {
            let cc = code.check_coords[j];
            let offsets = cc.family.offsets();
            h.row(j)
                .iter()
                .map(|&(q, _)| {
                    let slot = offsets
                        .iter()
                        .position(|off| {
                            code.qubit(
                                off.orientation,
                                cc.row as isize + off.dr,
                                cc.col as isize + off.dc,
                            ) == q
                        })
                        .expect("row support matches family offsets");
                    (cc.family.class_base() + slot) as u8
                })
                .collect()
        })
        .collect();
    Ok(EdgeClassMap { classes })
}

/// Matching sector: which weight-4 family provides the graph nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sector {
    /// Vertex (X-type) checks; edges flip on the Z component of an error.
    Vertex,
    /// Plaquette (Z-type) checks; edges flip on the X component.
    Plaquette,
}

impl Sector {
    pub const BOTH: [Sector; 2] = [Sector::Vertex, Sector::Plaquette];

    /// Whether a Pauli on a qubit toggles this sector's checks.
    pub fn flipped_by(self, p: Pauli) -> bool {
        match self {
            Sector::Vertex => p.z(),
            Sector::Plaquette => p.x(),
        }
    }

    /// Pauli that, applied along a matched path, removes this sector's defects.
    pub fn correction(self) -> Pauli {
        match self {
            Sector::Vertex => Pauli::Z,
            Sector::Plaquette => Pauli::X,
        }
    }
}

/// One sector's detection graph: nodes are weight-4 checks, edges are qubits.
#[derive(Clone, Debug)]
pub struct SectorGraph {
    pub sector: Sector,
    /// `endpoints[q]` are the two nodes joined by qubit `q`.
    pub endpoints: Vec<(usize, usize)>,
    /// `adjacency[v]` lists `(neighbour, qubit)` sorted by neighbour then qubit.
    pub adjacency: Vec<Vec<(usize, usize)>>,
    /// First standard-matrix row of this sector (node `v` is row `row_offset + v`).
    pub row_offset: usize,
}

impl SectorGraph {
    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.endpoints.len()
    }
}

#[derive(Clone, Debug)]
pub struct DetectionGeometry {
    pub vertex: SectorGraph,
    pub plaquette: SectorGraph,
}

impl DetectionGeometry {
    pub fn sector(&self, s: Sector) -> &SectorGraph {
        match s {
            Sector::Vertex => &self.vertex,
            Sector::Plaquette => &self.plaquette,
        }
    }
}

pub fn build_detection_geometry(code: &ToricCode) -> DetectionGeometry {
    let d = code.d;
    let d2 = d * d;
    let build = |sector: Sector, row_offset: usize| {
        let mut endpoints = vec![(usize::MAX, usize::MAX); 2 * d2];
        // Node incidence from the standard rows themselves.
        for v in 0..d2 {
            for &(q, _) in code.standard.row(row_offset + v) {
                let e = &mut endpoints[q];
                if e.0 == usize::MAX {
                    e.0 = v;
                } else {
                    e.1 = v;
                }
            }
        }
        let mut adjacency = vec![Vec::new(); d2];
        for (q, &(a, b)) in endpoints.iter().enumerate() {
            debug_assert!(b != usize::MAX, "qubit {q} touches one node in {sector:?}");
            adjacency[a].push((b, q));
            adjacency[b].push((a, q));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        SectorGraph {
            sector,
            endpoints,
            adjacency,
            row_offset,
        }
    };
    DetectionGeometry {
        vertex: build(Sector::Vertex, 0),
        plaquette: build(Sector::Plaquette, d2),
    }
}

/// Kinds of structural violation, listed in the order `validate` tests them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    RowCount(String),
    RowWeight(String),
    StabilizerCommutation(String),
    Rank(String),
    LogicalStabilizerCommutation(String),
    LogicalPairing(String),
    LogicalWeight(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowCount(s) => write!(f, "row count: {s}"),
            Violation::RowWeight(s) => write!(f, "row weight: {s}"),
            Violation::StabilizerCommutation(s) => write!(f, "stabilizer commutation: {s}"),
            Violation::Rank(s) => write!(f, "rank: {s}"),
            Violation::LogicalStabilizerCommutation(s) => {
                write!(f, "logical-stabilizer commutation: {s}")
            }
            Violation::LogicalPairing(s) => write!(f, "logical pairing: {s}"),
            Violation::LogicalWeight(s) => write!(f, "logical weight: {s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub first_violation: Option<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.first_violation {
            None => write!(f, "pass"),
            Some(v) => write!(f, "fail: {v}"),
        }
    }
}

pub fn validate(code: &ToricCode) -> ValidationReport {
    ValidationReport {
        first_violation: check_invariants(code).err(),
    }
}

fn check_invariants(code: &ToricCode) -> std::result::Result<(), Violation> {
    let d = code.d;
    let n = 2 * d * d;
    let std_rows = code.standard.num_rows();
    let oc = &code.overcomplete;

    if code.standard.num_qubits() != n || oc.num_qubits() != n {
        return Err(Violation::RowCount(format!("matrices must have n = {n} columns")));
    }
    if std_rows != n {
        return Err(Violation::RowCount(format!(
            "standard matrix has {std_rows} rows, expected {n}"
        )));
    }
    if oc.num_rows() != 3 * n {
        return Err(Violation::RowCount(format!(
            "overcomplete matrix has {} rows, expected 3n = {}",
            oc.num_rows(),
            3 * n
        )));
    }
    if d >= 3 {
        for j in 0..oc.num_rows() {
            let want = code.check_coords[j].family.weight();
            if oc.row(j).len() != want {
                return Err(Violation::RowWeight(format!(
                    "row {j} ({}) has weight {}, expected {want}",
                    code.check_coords[j].family,
                    oc.row(j).len()
                )));
            }
        }
    }
    for j in 0..std_rows {
        if oc.row(j) != code.standard.row(j) {
            return Err(Violation::RowCount(format!(
                "overcomplete row {j} differs from the standard row"
            )));
        }
    }
    for j in 0..oc.num_rows() {
        let s = code.standard.syndrome(&oc.row_vector(j)).expect("sizes checked");
        if !s.is_zero() {
            return Err(Violation::StabilizerCommutation(format!(
                "row {j} anticommutes with {} standard rows",
                s.weight()
            )));
        }
    }
    let rank = code.standard.symplectic_rank();
    if rank != n - 2 {
        return Err(Violation::Rank(format!(
            "standard symplectic rank {rank}, expected n - 2 = {}",
            n - 2
        )));
    }
    let oc_rank = oc.symplectic_rank();
    if oc_rank != n - 2 {
        return Err(Violation::Rank(format!(
            "overcomplete rank {oc_rank}, expected {}",
            n - 2
        )));
    }
    for (a, l) in code.logicals.iter().enumerate() {
        let s = oc.syndrome(l).expect("sizes checked");
        if !s.is_zero() {
            return Err(Violation::LogicalStabilizerCommutation(format!(
                "logical {a} anticommutes with {} checks",
                s.weight()
            )));
        }
    }
    for a in 0..4 {
        for b in 0..4 {
            // X_i (0,1) must anticommute exactly with Z_i (2,3).
            let expect = (a < 2) != (b < 2) && a % 2 == b % 2;
            let got = code.logicals[a]
                .anticommutes(&code.logicals[b])
                .expect("sizes checked");
            if got != expect {
                return Err(Violation::LogicalPairing(format!(
                    "logicals {a},{b}: anticommute = {got}, expected {expect}"
                )));
            }
        }
    }
    let mut rows: Vec<Vec<u64>> = (0..std_rows)
        .map(|j| code.standard.row_vector(j).to_binary_row())
        .collect();
    rows.extend(code.logicals.iter().map(PauliVector::to_binary_row));
    if gf2_rank(rows) != n + 2 {
        return Err(Violation::LogicalPairing(
            "logicals are not independent of the stabilizers".into(),
        ));
    }
    for (a, l) in code.logicals.iter().enumerate() {
        if l.weight() != d {
            return Err(Violation::LogicalWeight(format!(
                "logical {a} has weight {}, expected {d}",
                l.weight()
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let c = build_toric(4).unwrap();
        assert_eq!(c.num_qubits(), 32);
        assert_eq!(c.standard().num_rows(), 32);
        assert_eq!(c.overcomplete().num_rows(), 96);
        let c = build_toric(10).unwrap();
        assert_eq!(c.overcomplete().num_rows(), 600);
        assert_eq!(c.overcomplete().num_qubits(), 200);
        assert!(build_toric(1).is_err());
    }

    #[test]
    fn expanded_syndrome_matches_overcomplete() {
        use crate::noise::{DepolarizingChannel, ShotSeed};
        let c = build_toric(5).unwrap();
        let ch = DepolarizingChannel::new(0.2).unwrap();
        for i in 0..50 {
            let e = ch.sample_error(c.num_qubits(), ShotSeed::new(1, i));
            let s = c.standard().syndrome(&e).unwrap();
            assert_eq!(c.expand_syndrome(&s).unwrap(), c.overcomplete().syndrome(&e).unwrap());
        }
    }

    #[test]
    fn rank_d4() {
        let c = build_toric(4).unwrap();
        assert_eq!(c.standard().symplectic_rank(), 30);
    }

    #[test]
    fn validate_pass_and_corruptions() {
        let c = build_toric(6).unwrap();
        assert!(validate(&c).passed(), "{}", validate(&c));

        let mut bad = c.clone();
        let q = (0..bad.num_qubits())
            .find(|&q| bad.logicals[0].get(q) != Pauli::I)
            .unwrap();
        bad.logicals[0].set(q, Pauli::Z);
        assert!(matches!(
            validate(&bad).first_violation,
            Some(Violation::LogicalStabilizerCommutation(_))
        ));

        // Replace a weight-6 row by a product of two non-adjacent vertex rows.
        let mut bad = c.clone();
        let n = bad.num_qubits();
        let j = n; // first weight-6 row
        let far = bad
            .standard
            .row_vector(0)
            .mul(&bad.standard.row_vector(bad.check_row(CheckCoord {
                family: CheckFamily::Vertex,
                row: 3,
                col: 3,
            })))
            .unwrap();
        let mut rows: Vec<PauliVector> = (0..bad.overcomplete.num_rows())
            .map(|r| bad.overcomplete.row_vector(r))
            .collect();
        rows[j] = far;
        bad.overcomplete = SparseCheckMatrix::from_pauli_vectors(n, &rows).unwrap();
        let v = validate(&bad).first_violation;
        assert!(matches!(v, Some(Violation::RowWeight(_))), "{v:?}");
    }

    #[test]
    fn odd_distance_validates() {
        for d in [3, 5, 7] {
            assert!(validate(&build_toric(d).unwrap()).passed());
        }
    }

    #[test]
    fn class_counts() {
        for d in [4, 10] {
            let c = build_toric(d).unwrap();
            let m = build_edge_classes(&c).unwrap();
            assert_eq!(m.num_edges(), 32 * d * d);
            let mut seen = [false; NUM_EDGE_CLASSES];
            for c in m.flat() {
                seen[c] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
        assert!(build_edge_classes(&build_toric(2).unwrap()).is_err());
    }

    #[test]
    fn single_z_flips_two_vertices() {
        let c = build_toric(4).unwrap();
        for q in 0..c.num_qubits() {
            let e = PauliVector::from_support(c.num_qubits(), &[q], Pauli::Z);
            let s = c.standard().syndrome(&e).unwrap();
            assert_eq!(s.bits()[..16].iter().filter(|&&b| b == 1).count(), 2);
            assert!(s.bits()[16..].iter().all(|&b| b == 0));
        }
    }
}
