//! CSS stabilizer codes in the `(H1, G2)` representation.
//!
//! `H1` holds the Z-type stabilizer generators (its syndrome detects X
//! errors) and `G2` the X-type generators. The pair defines a CSS code iff
//! `G2 · H1ᵀ = 0`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector, RowSpace};

/// Single-qubit Pauli error symbol, ordered `I, X, Y, Z` (0..=3).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_index(i: usize) -> Pauli {
        Self::ALL[i]
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Whether the symbol has an X component (X or Y).
    #[inline]
    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    /// Whether the symbol has a Z component (Z or Y).
    #[inline]
    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn from_xz(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Whether `self` commutes with `other` as single-qubit operators.
    #[inline]
    pub fn commutes_with(self, other: Pauli) -> bool {
        self == Pauli::I || other == Pauli::I || self == other
    }

    pub fn as_char(self) -> char {
        ['I', 'X', 'Y', 'Z'][self.index()]
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' | 'i' | '0' => Some(Pauli::I),
            'X' | 'x' | '1' => Some(Pauli::X),
            'Y' | 'y' | '2' => Some(Pauli::Y),
            'Z' | 'z' | '3' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// An `n`-qubit Pauli operator up to phase, in symplectic form `(x, z)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliVector {
    x: BitVector,
    z: BitVector,
}

impl PauliVector {
    pub fn new(x: BitVector, z: BitVector) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::dims("Pauli vector z part", x.len(), z.len()));
        }
        Ok(Self { x, z })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
        }
    }

    pub fn from_paulis(ps: &[Pauli]) -> Self {
        Self {
            x: BitVector::from_bools(ps.iter().map(|p| p.has_x())),
            z: BitVector::from_bools(ps.iter().map(|p| p.has_z())),
        }
    }

    /// Parses a string over `IXYZ` (or `0123`), ignoring whitespace.
    pub fn parse(s: &str) -> Option<Self> {
        let ps: Option<Vec<Pauli>> = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(Pauli::from_char)
            .collect();
        ps.map(|ps| Self::from_paulis(&ps))
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &BitVector {
        &self.x
    }

    pub fn z(&self) -> &BitVector {
        &self.z
    }

    pub fn get(&self, i: usize) -> Pauli {
        Pauli::from_xz(self.x.get(i), self.z.get(i))
    }

    pub fn set(&mut self, i: usize, p: Pauli) {
        self.x.set(i, p.has_x());
        self.z.set(i, p.has_z());
    }

    pub fn to_paulis(&self) -> Vec<Pauli> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    /// Product up to phase: componentwise XOR of the symplectic parts.
    pub fn mul(&self, other: &PauliVector) -> PauliVector {
        PauliVector {
            x: self.x.xor(&other.x),
            z: self.z.xor(&other.z),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Number of qubits acted on nontrivially.
    pub fn weight(&self) -> usize {
        (0..self.len())
            .filter(|&i| self.x.get(i) || self.z.get(i))
            .count()
    }
}

impl fmt::Display for PauliVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            write!(f, "{}", self.get(i).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliVector({self})")
    }
}

/// Symplectic inner product `z'·xᵀ + x'·zᵀ mod 2`; `false` means the two
/// operators commute.
pub fn symplectic_inner(p: &PauliVector, q: &PauliVector) -> Result<bool> {
    if p.len() != q.len() {
        return Err(Error::dims("symplectic inner product", p.len(), q.len()));
    }
    Ok(q.z.dot(&p.x) ^ q.x.dot(&p.z))
}

/// Result of one decoding trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecodeOutcome {
    FailureNonConvergence,
    SuccessExactMatch,
    SuccessDegenerate,
    FailureLogical,
}

impl DecodeOutcome {
    pub fn is_success(self) -> bool {
        matches!(
            self,
            DecodeOutcome::SuccessExactMatch | DecodeOutcome::SuccessDegenerate
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            DecodeOutcome::FailureNonConvergence => "nonconvergence",
            DecodeOutcome::SuccessExactMatch => "exact",
            DecodeOutcome::SuccessDegenerate => "degenerate",
            DecodeOutcome::FailureLogical => "logical",
        }
    }
}

/// A validated CSS code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssCode {
    name: String,
    h1: BitMatrix,
    g2: BitMatrix,
    h1_space: RowSpace,
    g2_space: RowSpace,
}

/// Checks `G2 · H1ᵀ = 0` and builds the code.
pub fn validate_css(name: impl Into<String>, h1: BitMatrix, g2: BitMatrix) -> Result<CssCode> {
    if h1.cols() != g2.cols() {
        return Err(Error::dims("G2 column count", h1.cols(), g2.cols()));
    }
    let prod = g2.mul_transpose(&h1)?;
    for g in 0..prod.rows() {
        if let Some(h) = prod.row(g).iter_ones().next() {
            return Err(Error::CssViolation {
                g2_row: g,
                h1_row: h,
            });
        }
    }
    Ok(CssCode {
        name: name.into(),
        h1_space: RowSpace::new(&h1),
        g2_space: RowSpace::new(&g2),
        h1,
        g2,
    })
}

impl CssCode {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Number of physical qubits.
    pub fn n(&self) -> usize {
        self.h1.cols()
    }

    pub fn h1(&self) -> &BitMatrix {
        &self.h1
    }

    pub fn g2(&self) -> &BitMatrix {
        &self.g2
    }

    /// `k1 = n − rank(H1)`, the dimension of `ker H1`.
    pub fn k1(&self) -> usize {
        self.n() - self.h1_space.dim()
    }

    /// `k2 = rank(G2)`.
    pub fn k2(&self) -> usize {
        self.g2_space.dim()
    }

    /// Number of logical qubits, `k1 − k2`.
    pub fn k(&self) -> usize {
        self.k1() - self.k2()
    }

    /// Independent stabilizer count `n − k1 + k2`.
    pub fn m(&self) -> usize {
        self.n() - self.k1() + self.k2()
    }

    /// `s_x = H1 · xᵀ`.
    pub fn syndrome_x(&self, x: &BitVector) -> Result<BitVector> {
        self.h1.mul_vec(x)
    }

    /// `s_z = G2 · zᵀ`.
    pub fn syndrome_z(&self, z: &BitVector) -> Result<BitVector> {
        self.g2.mul_vec(z)
    }

    /// `(s_x ‖ s_z)`, ordered by H1 rows then G2 rows.
    pub fn syndrome_full(&self, e: &PauliVector) -> Result<BitVector> {
        Ok(self.syndrome_x(e.x())?.concat(&self.syndrome_z(e.z())?))
    }

    pub fn g2_space(&self) -> &RowSpace {
        &self.g2_space
    }

    /// Whether an X-type residual is a stabilizer.
    pub fn is_x_stabilizer(&self, r: &BitVector) -> Result<bool> {
        self.g2_space.contains(r)
    }

    /// Whether a Z-type residual is a stabilizer.
    pub fn is_z_stabilizer(&self, r: &BitVector) -> Result<bool> {
        self.h1_space.contains(r)
    }

    /// Classifies a bit-flip decode of `truth` against `estimate`.
    pub fn classify_x_outcome(
        &self,
        truth: &BitVector,
        estimate: Option<&BitVector>,
    ) -> Result<DecodeOutcome> {
        if truth.len() != self.n() {
            return Err(Error::dims("true error length", self.n(), truth.len()));
        }
        let Some(est) = estimate else {
            return Ok(DecodeOutcome::FailureNonConvergence);
        };
        if est.len() != self.n() {
            return Err(Error::dims("estimate length", self.n(), est.len()));
        }
        if self.syndrome_x(truth)? != self.syndrome_x(est)? {
            return Err(Error::SyndromeMismatch);
        }
        let residual = truth.xor(est);
        Ok(if residual.is_zero() {
            DecodeOutcome::SuccessExactMatch
        } else if self.is_x_stabilizer(&residual)? {
            DecodeOutcome::SuccessDegenerate
        } else {
            DecodeOutcome::FailureLogical
        })
    }

    /// Serializes to the text code-file format (1-indexed row supports).
    pub fn to_code_file(&self) -> String {
        let mut out = format!(
            "css {} {} {} {}\n",
            self.name.replace(char::is_whitespace, "_"),
            self.n(),
            self.h1.rows(),
            self.g2.rows()
        );
        for m in [&self.h1, &self.g2] {
            for i in 0..m.rows() {
                let line: Vec<String> = m
                    .row(i)
                    .iter_ones()
                    .map(|j| (j + 1).to_string())
                    .collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
        out
    }

    /// Parses the text code-file format and validates the result.
    pub fn from_code_str(text: &str, path: &Path) -> Result<CssCode> {
        let perr = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
            let l = l.split('#').next().unwrap_or("").trim();
            (!l.is_empty()).then_some((i + 1, l))
        });
        let (hline, header) = lines
            .next()
            .ok_or_else(|| perr(1, "missing `css` header".into()))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 5 || toks[0] != "css" {
            return Err(perr(
                hline,
                "expected header `css <name> <n> <rows_H1> <rows_G2>`".into(),
            ));
        }
        let num = |t: &str, what: &str| {
            t.parse::<usize>()
                .map_err(|_| perr(hline, format!("invalid {what} `{t}`")))
        };
        let n = num(toks[2], "n")?;
        let rows_h1 = num(toks[3], "rows_H1")?;
        let rows_g2 = num(toks[4], "rows_G2")?;
        let mut supports: Vec<Vec<usize>> = Vec::with_capacity(rows_h1 + rows_g2);
        let mut last_line = hline;
        for _ in 0..rows_h1 + rows_g2 {
            let (ln, l) = lines.next().ok_or_else(|| {
                perr(
                    last_line,
                    format!(
                        "expected {} support rows, found {}",
                        rows_h1 + rows_g2,
                        supports.len()
                    ),
                )
            })?;
            last_line = ln;
            let mut row = Vec::new();
            for t in l.split_whitespace() {
                let j: usize = t
                    .parse()
                    .map_err(|_| perr(ln, format!("invalid column index `{t}`")))?;
                if j == 0 || j > n {
                    return Err(perr(ln, format!("column index {j} outside 1..={n}")));
                }
                if row.last().is_some_and(|&p| p >= j - 1) {
                    return Err(perr(ln, "column indices must be strictly ascending".into()));
                }
                row.push(j - 1);
            }
            supports.push(row);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(perr(ln, "trailing content after the last support row".into()));
        }
        let h1 = BitMatrix::from_supports(n, &supports[..rows_h1])?;
        let g2 = BitMatrix::from_supports(n, &supports[rows_h1..])?;
        validate_css(toks[1], h1, g2)
    }
}

/// Reads and validates a code file.
pub fn parse_code_file(path: impl AsRef<Path>) -> Result<CssCode> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: PathBuf::from(path),
        source,
    })?;
    CssCode::from_code_str(&text, path)
}

/// Hypergraph product of two classical check matrices:
/// `H1 = [Ha ⊗ I_nb | I_ma ⊗ Hbᵀ]`, `G2 = [I_na ⊗ Hb | Haᵀ ⊗ I_mb]`.
pub fn hypergraph_product(ha: &BitMatrix, hb: &BitMatrix) -> Result<CssCode> {
    let (ma, na) = (ha.rows(), ha.cols());
    let (mb, nb) = (hb.rows(), hb.cols());
    let h1 = ha
        .kron(&BitMatrix::identity(nb))
        .hstack(&BitMatrix::identity(ma).kron(&hb.transpose()))?;
    let g2 = BitMatrix::identity(na)
        .kron(hb)
        .hstack(&ha.transpose().kron(&BitMatrix::identity(mb)))?;
    validate_css(format!("hgp_{}x{}_{}x{}", ma, na, mb, nb), h1, g2)
}

/// The [[7,1,3]] Steane code with `G2 = H1`.
pub fn steane() -> CssCode {
    let h = BitMatrix::from_dense(&[
        [1u8, 1, 1, 0, 1, 0, 0],
        [0, 1, 1, 1, 0, 1, 0],
        [0, 0, 1, 0, 1, 1, 1],
    ])
    .expect("static matrix");
    validate_css("steane", h.clone(), h).expect("Steane code is CSS")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(s: &str) -> BitVector {
        BitVector::parse_bits(s).unwrap()
    }

    #[test]
    fn symplectic_examples() {
        let p = PauliVector::parse("XZY").unwrap();
        assert!(!symplectic_inner(&p, &p).unwrap());
        let x = PauliVector::parse("X").unwrap();
        let z = PauliVector::parse("Z").unwrap();
        assert!(symplectic_inner(&x, &z).unwrap());
        let xx = PauliVector::parse("XX").unwrap();
        let zz = PauliVector::parse("ZZ").unwrap();
        assert!(!symplectic_inner(&xx, &zz).unwrap());
        assert!(symplectic_inner(&xx, &z).is_err());
    }

    #[test]
    fn validate_examples() {
        let s = steane();
        assert_eq!((s.n(), s.k1(), s.k2(), s.k(), s.m()), (7, 4, 3, 1, 6));
        let err = validate_css(
            "bad",
            BitMatrix::from_dense(&[[1u8, 1]]).unwrap(),
            BitMatrix::from_dense(&[[1u8, 0]]).unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::CssViolation { g2_row: 0, h1_row: 0 }));
        let ok = validate_css(
            "no_g2",
            BitMatrix::from_dense(&[[1u8, 1, 0]]).unwrap(),
            BitMatrix::zeros(0, 3),
        )
        .unwrap();
        assert_eq!(ok.k2(), 0);
        assert!(validate_css("cols", BitMatrix::zeros(1, 3), BitMatrix::zeros(1, 4)).is_err());
    }

    #[test]
    fn syndrome_examples() {
        let s = steane();
        assert_eq!(s.syndrome_x(&bits("0010000")).unwrap(), bits("111"));
        assert!(s.syndrome_x(&BitVector::zeros(7)).unwrap().is_zero());
        assert_eq!(s.syndrome_x(&bits("1100000")).unwrap(), bits("010"));
        assert!(s.syndrome_x(&BitVector::zeros(5)).is_err());

        assert!(s.syndrome_full(&PauliVector::identity(7)).unwrap().is_zero());
        let x3 = PauliVector::parse("IIXIIII").unwrap();
        assert_eq!(s.syndrome_full(&x3).unwrap(), bits("111000"));
        let y3 = PauliVector::parse("IIYIIII").unwrap();
        assert_eq!(s.syndrome_full(&y3).unwrap(), bits("111111"));
    }

    /// Brute force over `ker H1`: elements not in rowspace(G2).
    fn steane_logicals() -> Vec<BitVector> {
        let s = steane();
        (0u32..128)
            .map(|m| BitVector::from_bools((0..7).map(|i| m >> i & 1 == 1)))
            .filter(|x| s.syndrome_x(x).unwrap().is_zero())
            .filter(|x| !s.is_x_stabilizer(x).unwrap())
            .collect()
    }

    #[test]
    fn classify_examples() {
        let s = steane();
        let e1 = bits("1000000");
        assert_eq!(
            s.classify_x_outcome(&e1, Some(&e1)).unwrap(),
            DecodeOutcome::SuccessExactMatch
        );
        let est = e1.xor(&s.g2().row(0));
        assert_eq!(
            s.classify_x_outcome(&e1, Some(&est)).unwrap(),
            DecodeOutcome::SuccessDegenerate
        );
        let logicals = steane_logicals();
        // ker H1 has 16 elements, 8 of which are stabilizers.
        assert_eq!(logicals.len(), 8);
        let weight3 = logicals.iter().find(|l| l.weight() == 3).unwrap();
        assert_eq!(
            s.classify_x_outcome(&BitVector::zeros(7), Some(weight3)).unwrap(),
            DecodeOutcome::FailureLogical
        );
        assert_eq!(
            s.classify_x_outcome(&e1, None).unwrap(),
            DecodeOutcome::FailureNonConvergence
        );
        assert!(matches!(
            s.classify_x_outcome(&e1, Some(&bits("0100000"))),
            Err(Error::SyndromeMismatch)
        ));
    }

    #[test]
    fn hgp_examples() {
        let rep = BitMatrix::from_dense(&[[1u8, 1]]).unwrap();
        let c = hypergraph_product(&rep, &rep).unwrap();
        assert_eq!((c.n(), c.k()), (5, 1));
        let id = BitMatrix::identity(2);
        let c = hypergraph_product(&id, &id).unwrap();
        assert_eq!((c.n(), c.k()), (8, 0));
    }

    #[test]
    fn code_file_round_trip_and_errors() {
        let p = Path::new("inline");
        let s = steane();
        let parsed = CssCode::from_code_str(&s.to_code_file(), p).unwrap();
        assert_eq!(parsed, s);

        let text = "# comment\n\ncss t 3 1 1\n1 2 # trailing\n1\n";
        match CssCode::from_code_str(text, p) {
            Err(Error::CssViolation { .. }) => {}
            other => panic!("expected CSS violation, got {other:?}"),
        }
        for (bad, line) in [
            ("css t 3 1 0\n1 4\n", 2),
            ("css t 3 2 0\n1 2\n", 2),
            ("css t x 1 0\n1\n", 1),
            ("css t 3 1 0\n2 1\n", 2),
            ("css t 3 1 0\n1\n2\n", 3),
            ("code t 3 1 0\n1\n", 1),
        ] {
            match CssCode::from_code_str(bad, p) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{bad:?}"),
                other => panic!("expected parse error for {bad:?}, got {other:?}"),
            }
        }
    }

    fn arb_check(max_r: usize, max_c: usize) -> impl Strategy<Value = BitMatrix> {
        (1..=max_r, 1..=max_c).prop_flat_map(|(r, c)| {
            prop::collection::vec(prop::collection::vec(0u8..2, c), r)
                .prop_map(|rows| BitMatrix::from_dense(&rows).unwrap())
        })
    }

    proptest! {
        #[test]
        fn hgp_always_valid(ha in arb_check(4, 5), hb in arb_check(4, 5)) {
            let c = hypergraph_product(&ha, &hb).unwrap();
            prop_assert_eq!(c.n(), ha.cols() * hb.cols() + ha.rows() * hb.rows());
            // Every X generator commutes with every Z generator.
            for g in c.g2().row_vectors() {
                let gx = PauliVector::new(g.clone(), BitVector::zeros(c.n())).unwrap();
                for h in c.h1().row_vectors() {
                    let hz = PauliVector::new(BitVector::zeros(c.n()), h).unwrap();
                    prop_assert!(!symplectic_inner(&gx, &hz).unwrap());
                }
            }
        }

        #[test]
        fn syndrome_is_linear(a in prop::collection::vec(any::<bool>(), 7),
                              b in prop::collection::vec(any::<bool>(), 7)) {
            let s = steane();
            let (u, v) = (BitVector::from_bools(a), BitVector::from_bools(b));
            prop_assert_eq!(
                s.syndrome_x(&u.xor(&v)).unwrap(),
                s.syndrome_x(&u).unwrap().xor(&s.syndrome_x(&v).unwrap())
            );
        }

        #[test]
        fn classification_respects_cosets(
            t in prop::collection::vec(any::<bool>(), 7),
            kerbits in 0u32..16,
            stab in 0u32..8,
        ) {
            let s = steane();
            let truth = BitVector::from_bools(t);
            let ker = s.h1().nullspace_basis();
            let mut est = truth.clone();
            for i in 0..ker.rows() {
                if kerbits >> i & 1 == 1 { est.xor_assign(&ker.row(i)); }
            }
            let mut r = BitVector::zeros(7);
            for i in 0..3 {
                if stab >> i & 1 == 1 { r.xor_assign(&s.g2().row(i)); }
            }
            prop_assert_eq!(
                s.classify_x_outcome(&truth, Some(&est)).unwrap(),
                s.classify_x_outcome(&truth.xor(&r), Some(&est.xor(&r))).unwrap()
            );
        }
    }
}
