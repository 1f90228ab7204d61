//! Two-mode Gaussian states in the covariance-matrix picture.
//!
//! Quadratures are `X = a + a†` and `Y = (a - a†)/i`, so a vacuum mode has
//! variance 1 on every quadrature and the shot-noise level (SNL) of a single
//! mode is 1. Matrices are ordered `(X_conj, Y_conj, X_probe, Y_probe)`: the
//! first block is the conjugate field kept by Alice, the second the probe
//! field sent to Bob.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum `|σ_ij - σ_ji|` accepted when building a [`CovarianceMatrix`].
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Slack on the uncertainty bound (`ν ≥ 1`, `V·V' ≥ 1`).
pub const PHYSICALITY_TOL: f64 = 1e-6;

/// Quadrature labels in matrix order, as written to JSON.
pub const QUADRATURE_ORDER: [&str; 4] = ["Xc", "Yc", "Xp", "Yp"];

/// The two-mode symplectic form, block-diagonal in `[[0, 1], [-1, 0]]`.
pub fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

/// The Pauli `Z` matrix, `diag(1, -1)`.
pub fn pauli_z() -> Matrix2<f64> {
    Matrix2::new(1.0, 0.0, 0.0, -1.0)
}

/// Symmetric 4×4 covariance matrix of a two-mode Gaussian state.
///
/// Construction rejects non-finite entries and asymmetry above
/// [`SYMMETRY_TOL`], then symmetrizes so that `σ_ij == σ_ji` holds bit for
/// bit. Physicality is *not* enforced here: reconstructed matrices may be
/// marginally unphysical and are still worth holding. Use [`validate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceMatrix(Matrix4<f64>);

impl CovarianceMatrix {
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("covariance matrix has non-finite entries"));
        }
        let defect = symmetry_defect(&m);
        if defect > SYMMETRY_TOL {
            return Err(Error::invalid(format!(
                "covariance matrix is not symmetric (defect {defect:e})"
            )));
        }
        Ok(Self((m + m.transpose()) * 0.5))
    }

    pub fn from_rows(rows: [[f64; 4]; 4]) -> Result<Self> {
        Self::new(Matrix4::from_fn(|i, j| rows[i][j]))
    }

    /// Assembles `[[A, C], [Cᵀ, B]]` from Alice's block, Bob's block and the
    /// cross-correlation block.
    pub fn from_blocks(a: Matrix2<f64>, b: Matrix2<f64>, c: Matrix2<f64>) -> Result<Self> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&b);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&c);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&c.transpose());
        Self::new(m)
    }

    /// Two-mode vacuum.
    pub fn vacuum() -> Self {
        Self(Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn rows(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.0[(i, j)];
            }
        }
        out
    }

    /// Alice's (conjugate-field) block `σ_A`.
    pub fn block_a(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 0).into_owned()
    }

    /// Bob's (probe-field) block `σ_B`.
    pub fn block_b(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(2, 2).into_owned()
    }

    /// Cross-correlation block `C` (rows Alice, columns Bob).
    pub fn block_c(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 2).into_owned()
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    /// Partial transpose on Bob's mode, `P σ P` with `P = diag(1, 1, 1, -1)`.
    pub fn partial_transpose(&self) -> Self {
        let mut m = self.0;
        for k in 0..4 {
            if k != 3 {
                m[(3, k)] = -m[(3, k)];
                m[(k, 3)] = -m[(k, 3)];
            }
        }
        Self(m)
    }

    /// Both symplectic eigenvalues, ascending.
    pub fn symplectic_eigenvalues(&self) -> [f64; 2] {
        symplectic_eigenvalues(&self.0)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.0.cholesky().is_some()
    }
}

impl fmt::Display for CovarianceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..4 {
            let row = (0..4)
                .map(|j| format!("{:>10.6}", self.0[(i, j)]))
                .collect::<Vec<_>>()
                .join(" ");
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CovarianceRepr {
    order: Vec<String>,
    matrix: [[f64; 4]; 4],
}

impl Serialize for CovarianceMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CovarianceRepr {
            order: QUADRATURE_ORDER.iter().map(|q| q.to_string()).collect(),
            matrix: self.rows(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CovarianceMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = CovarianceRepr::deserialize(d)?;
        if repr.order != QUADRATURE_ORDER {
            return Err(serde::de::Error::custom(format!(
                "quadrature order must be {QUADRATURE_ORDER:?}, got {:?}",
                repr.order
            )));
        }
        CovarianceMatrix::from_rows(repr.matrix).map_err(serde::de::Error::custom)
    }
}

fn symmetry_defect(m: &Matrix4<f64>) -> f64 {
    let mut defect: f64 = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            defect = defect.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    defect
}

/// Symplectic eigenvalues of a symmetric 4×4 matrix, ascending: the moduli
/// of the eigenvalues of `iΩσ`, which come in `±ν` pairs.
pub fn symplectic_eigenvalues(m: &Matrix4<f64>) -> [f64; 2] {
    // Ωσ is real with eigenvalues ±iν, so its moduli match those of iΩσ.
    let eig = (symplectic_form() * m).complex_eigenvalues();
    let mut moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    [
        0.5 * (moduli[0] + moduli[1]),
        0.5 * (moduli[2] + moduli[3]),
    ]
}

/// Outcome of [`validate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidityReport {
    /// `max |σ_ij - σ_ji|`.
    pub symmetry_defect: f64,
    pub min_symplectic_eigenvalue: f64,
    pub positive_definite: bool,
    pub symmetric: bool,
    /// `σ + iΩ ⪰ 0` within [`PHYSICALITY_TOL`].
    pub physical: bool,
}

impl ValidityReport {
    pub fn passed(&self) -> bool {
        self.symmetric && self.physical
    }
}

/// Checks a candidate matrix for symmetry and the uncertainty principle.
/// Never fails; non-finite input simply yields a failing report.
pub fn validate(m: &Matrix4<f64>) -> ValidityReport {
    if m.iter().any(|x| !x.is_finite()) {
        return ValidityReport {
            symmetry_defect: f64::NAN,
            min_symplectic_eigenvalue: f64::NAN,
            positive_definite: false,
            symmetric: false,
            physical: false,
        };
    }
    let defect = symmetry_defect(m);
    let sym = (m + m.transpose()) * 0.5;
    let positive_definite = sym.cholesky().is_some();
    let nu = symplectic_eigenvalues(&sym)[0];
    ValidityReport {
        symmetry_defect: defect,
        min_symplectic_eigenvalue: nu,
        positive_definite,
        symmetric: defect <= SYMMETRY_TOL,
        physical: positive_definite && nu >= 1.0 - PHYSICALITY_TOL,
    }
}

/// Source parameters of one two-mode squeezed pair: the squeezed and
/// anti-squeezed joint-quadrature variances `(V, V')`.
///
/// A spec built from a squeezing parameter `r` is pure (`V = e^{-2r}`,
/// `V' = e^{2r}`); one built from measured variances may be mixed
/// (`V·V' > 1`). The smaller variance is always stored as `V`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct SqueezingSpec {
    v: f64,
    vp: f64,
    r: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum SpecRepr {
    Squeezing {
        r: f64,
    },
    Variances {
        #[serde(rename = "V")]
        v: f64,
        #[serde(rename = "Vp")]
        vp: f64,
    },
}

impl TryFrom<SpecRepr> for SqueezingSpec {
    type Error = Error;

    fn try_from(repr: SpecRepr) -> Result<Self> {
        match repr {
            SpecRepr::Squeezing { r } => SqueezingSpec::from_squeezing(r),
            SpecRepr::Variances { v, vp } => SqueezingSpec::new(v, vp),
        }
    }
}

impl From<SqueezingSpec> for SpecRepr {
    fn from(spec: SqueezingSpec) -> Self {
        match spec.r {
            Some(r) => SpecRepr::Squeezing { r },
            None => SpecRepr::Variances { v: spec.v, vp: spec.vp },
        }
    }
}

impl SqueezingSpec {
    pub fn new(v: f64, vp: f64) -> Result<Self> {
        if !(v.is_finite() && vp.is_finite() && v > 0.0 && vp > 0.0) {
            return Err(Error::invalid(format!(
                "variances must be positive and finite, got V={v}, V'={vp}"
            )));
        }
        let product = v * vp;
        if product < 1.0 - PHYSICALITY_TOL {
            return Err(Error::UnphysicalState { product });
        }
        let (v, vp) = if v <= vp { (v, vp) } else { (vp, v) };
        Ok(Self { v, vp, r: None })
    }

    /// Pure two-mode squeezed vacuum with squeezing parameter `r ≥ 0`.
    pub fn from_squeezing(r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::invalid(format!("squeezing parameter must be >= 0, got {r}")));
        }
        Ok(Self {
            v: (-2.0 * r).exp(),
            vp: (2.0 * r).exp(),
            r: Some(r),
        })
    }

    /// From the correlation and anti-correlation levels in dB relative to the
    /// two-mode SNL.
    pub fn from_decibels(squeezed: Decibel, antisqueezed: Decibel) -> Result<Self> {
        Self::new(squeezed.to_linear(), antisqueezed.to_linear())
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn vp(&self) -> f64 {
        self.vp
    }

    pub fn squeezing(&self) -> Option<f64> {
        self.r
    }

    pub fn is_pure(&self) -> bool {
        self.r.is_some()
    }

    /// Single-mode variance `(V + V')/2`.
    pub fn mean_variance(&self) -> f64 {
        0.5 * (self.v + self.vp)
    }

    /// Inter-mode correlation `(V' - V)/2`.
    pub fn correlation(&self) -> f64 {
        0.5 * (self.vp - self.v)
    }
}

/// Covariance matrix of the two-mode squeezed state described by `spec`,
/// `[[V_a I, V_c Z], [V_c Z, V_a I]]` with `V_a = (V+V')/2`, `V_c = (V'-V)/2`.
pub fn make_tmss(spec: &SqueezingSpec) -> CovarianceMatrix {
    let diag = Matrix2::identity() * spec.mean_variance();
    let cross = pauli_z() * spec.correlation();
    CovarianceMatrix::from_blocks(diag, diag, cross)
        .expect("a validated squeezing spec yields a finite symmetric matrix")
}

/// Topological charge of the probe mode; the conjugate carries the opposite.
pub type Charge = i32;

/// One entry of a [`MultiplexedState`]: the source spec and the current
/// covariance matrix of the `(conj −l, probe +l)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModePair {
    pub spec: SqueezingSpec,
    pub cm: CovarianceMatrix,
}

/// Independent two-mode states keyed by topological charge. No cross-`l`
/// correlations exist in this representation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MultiplexedState {
    pairs: BTreeMap<Charge, ModePair>,
}

impl MultiplexedState {
    pub fn get(&self, l: Charge) -> Option<&ModePair> {
        self.pairs.get(&l)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn charges(&self) -> impl Iterator<Item = Charge> + '_ {
        self.pairs.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Charge, &ModePair)> {
        self.pairs.iter().map(|(l, p)| (*l, p))
    }

    /// Applies `f` to every covariance matrix, keeping source specs.
    pub fn try_map_cm<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&CovarianceMatrix) -> Result<CovarianceMatrix>,
    {
        let pairs = self
            .pairs
            .iter()
            .map(|(l, p)| Ok((*l, ModePair { spec: p.spec, cm: f(&p.cm)? })))
            .collect::<Result<_>>()?;
        Ok(Self { pairs })
    }
}

/// Charges `(probe, conjugate)` carried by the pair with key `l`.
pub fn pair_charges(l: Charge) -> (Charge, Charge) {
    (l, -l)
}

/// Builds one independent two-mode squeezed state per topological charge.
pub fn make_multiplexed<I>(specs: I) -> Result<MultiplexedState>
where
    I: IntoIterator<Item = (Charge, SqueezingSpec)>,
{
    let mut pairs = BTreeMap::new();
    for (l, spec) in specs {
        let pair = ModePair { spec, cm: make_tmss(&spec) };
        if pairs.insert(l, pair).is_some() {
            return Err(Error::invalid(format!("duplicate topological charge {l}")));
        }
    }
    Ok(MultiplexedState { pairs })
}

/// A noise level in dB relative to the applicable shot-noise level.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Decibel(pub f64);

impl Decibel {
    pub fn to_linear(self) -> f64 {
        10f64.powf(self.0 / 10.0)
    }

    pub fn from_linear(v: f64) -> Result<Self> {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(format!("linear level must be positive, got {v}")));
        }
        Ok(Decibel(10.0 * v.log10()))
    }
}

impl fmt::Display for Decibel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} dB", self.0)
    }
}

pub fn db_to_linear(x: Decibel) -> f64 {
    x.to_linear()
}

pub fn linear_to_db(v: f64) -> Result<Decibel> {
    Decibel::from_linear(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn paper_spec() -> SqueezingSpec {
        SqueezingSpec::new(0.47, 4.11).unwrap()
    }

    #[test]
    fn tmss_from_measured_variances() {
        let cm = make_tmss(&paper_spec());
        assert_abs_diff_eq!(cm.get(0, 0), 2.29, epsilon = 1e-12);
        assert_abs_diff_eq!(cm.get(3, 3), 2.29, epsilon = 1e-12);
        assert_abs_diff_eq!(cm.get(0, 2), 1.82, epsilon = 1e-12);
        assert_abs_diff_eq!(cm.get(1, 3), -1.82, epsilon = 1e-12);
        assert_eq!(cm.get(0, 1), 0.0);
        assert_eq!(cm.get(0, 3), 0.0);
        assert_eq!(cm.block_a(), cm.block_b());
    }

    #[test]
    fn zero_squeezing_is_vacuum() {
        let cm = make_tmss(&SqueezingSpec::from_squeezing(0.0).unwrap());
        assert_eq!(cm, CovarianceMatrix::vacuum());
    }

    #[test]
    fn tmss_ln_sqrt3() {
        let spec = SqueezingSpec::from_squeezing(3f64.sqrt().ln()).unwrap();
        assert_abs_diff_eq!(spec.v(), 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(spec.vp(), 3.0, epsilon = 1e-14);
        let cm = make_tmss(&spec);
        assert_abs_diff_eq!(cm.get(0, 0), 5.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(cm.get(0, 2), 4.0 / 3.0, epsilon = 1e-14);
        let (va, vc) = (cm.get(0, 0), cm.get(0, 2));
        assert_abs_diff_eq!(va * va - vc * vc, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn unphysical_spec_rejected() {
        assert!(matches!(
            SqueezingSpec::new(0.4, 2.0),
            Err(Error::UnphysicalState { .. })
        ));
        assert!(matches!(SqueezingSpec::new(-0.4, 2.0), Err(Error::InvalidInput(_))));
        assert!(SqueezingSpec::from_squeezing(-0.1).is_err());
        assert!(SqueezingSpec::new(f64::NAN, 2.0).is_err());
    }

    #[test]
    fn spec_normalizes_order() {
        let spec = SqueezingSpec::new(4.11, 0.47).unwrap();
        assert_eq!(spec, paper_spec());
    }

    #[test]
    fn quoted_decibel_levels_are_slightly_inconsistent() {
        // -3.3 dB matches V = 0.47, but 6.1 dB is 4.074 rather than 4.11.
        let spec = SqueezingSpec::from_decibels(Decibel(-3.3), Decibel(6.1)).unwrap();
        assert_abs_diff_eq!(spec.v(), 0.47, epsilon = 0.01);
        assert_abs_diff_eq!(spec.vp(), 4.074, epsilon = 1e-3);
        assert!((spec.vp() - 4.11).abs() > 0.03);
    }

    #[test]
    fn multiplexed_paper_state() {
        let ms = make_multiplexed((0..3).map(|l| (l, paper_spec()))).unwrap();
        assert_eq!(ms.len(), 3);
        let reference = make_tmss(&paper_spec());
        for (_, pair) in ms.iter() {
            assert_eq!(pair.cm, reference);
        }
        assert_eq!(ms.charges().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(pair_charges(2), (2, -2));
    }

    #[test]
    fn multiplexed_empty_and_duplicates() {
        assert!(make_multiplexed(std::iter::empty()).unwrap().is_empty());
        let dup = make_multiplexed([(1, paper_spec()), (1, paper_spec())]);
        assert!(matches!(dup, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn multiplexed_from_squeezing_parameters() {
        let ms = make_multiplexed([
            (1, SqueezingSpec::from_squeezing(0.5).unwrap()),
            (2, SqueezingSpec::from_squeezing(0.2).unwrap()),
        ])
        .unwrap();
        assert_abs_diff_eq!(ms.get(1).unwrap().spec.v(), (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(ms.get(2).unwrap().spec.v(), (-0.4f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn decibel_conversions() {
        assert_abs_diff_eq!(db_to_linear(Decibel(3.6)), 2.291, epsilon = 1e-3);
        assert_eq!(db_to_linear(Decibel(0.0)), 1.0);
        assert_abs_diff_eq!(db_to_linear(Decibel(-3.3)), 0.4677, epsilon = 1e-4);
        assert!((db_to_linear(Decibel(-3.3)) - 0.47).abs() < 0.01);
        assert!(linear_to_db(0.0).is_err());
        assert!(linear_to_db(-1.0).is_err());
    }

    #[test]
    fn validate_reports() {
        let id = validate(&Matrix4::identity());
        assert!(id.passed());
        assert_abs_diff_eq!(id.min_symplectic_eigenvalue, 1.0, epsilon = 1e-12);

        let tmss = validate(make_tmss(&paper_spec()).matrix());
        assert!(tmss.passed());
        assert_abs_diff_eq!(
            tmss.min_symplectic_eigenvalue,
            (0.47f64 * 4.11).sqrt(),
            epsilon = 1e-9
        );

        let sub_vacuum = validate(&(Matrix4::identity() * 0.5));
        assert!(sub_vacuum.symmetric);
        assert!(!sub_vacuum.physical);

        let mut asym = Matrix4::identity();
        asym[(0, 1)] = 1e-3;
        let rep = validate(&asym);
        assert!(!rep.symmetric);
        assert_abs_diff_eq!(rep.symmetry_defect, 1e-3, epsilon = 1e-15);

        let mut nan = Matrix4::identity();
        nan[(2, 2)] = f64::NAN;
        assert!(!validate(&nan).passed());
    }

    #[test]
    fn construction_enforces_symmetry() {
        let mut m = Matrix4::identity();
        m[(0, 2)] = 0.5;
        m[(2, 0)] = 0.5 + 1e-12;
        let cm = CovarianceMatrix::new(m).unwrap();
        assert_eq!(cm.get(0, 2), cm.get(2, 0));
        m[(2, 0)] = 0.6;
        assert!(CovarianceMatrix::new(m).is_err());
    }

    #[test]
    fn partial_transpose_flips_bob_momentum() {
        let cm = make_tmss(&paper_spec());
        let pt = cm.partial_transpose();
        assert_eq!(pt.get(1, 3), -cm.get(1, 3));
        assert_eq!(pt.get(0, 2), cm.get(0, 2));
        assert_eq!(pt.get(3, 3), cm.get(3, 3));
        assert_eq!(pt.partial_transpose(), cm);
    }

    #[test]
    fn covariance_json_layout() {
        let cm = make_tmss(&paper_spec());
        let json = serde_json::to_value(cm).unwrap();
        assert_eq!(json["order"], serde_json::json!(["Xc", "Yc", "Xp", "Yp"]));
        assert_eq!(json["matrix"].as_array().unwrap().len(), 4);
        let back: CovarianceMatrix = serde_json::from_value(json).unwrap();
        assert_eq!(back, cm);

        let bad = serde_json::json!({"order": ["Xp","Yp","Xc","Yc"], "matrix": cm.rows()});
        assert!(serde_json::from_value::<CovarianceMatrix>(bad).is_err());
    }

    #[test]
    fn multiplexed_json_layout() {
        let ms = make_multiplexed([
            (-1, paper_spec()),
            (2, SqueezingSpec::from_squeezing(0.3).unwrap()),
        ])
        .unwrap();
        let json = serde_json::to_value(&ms).unwrap();
        assert!(json["pairs"]["-1"]["cm"]["matrix"].is_array());
        assert_eq!(json["pairs"]["-1"]["spec"]["V"], serde_json::json!(0.47));
        assert_eq!(json["pairs"]["2"]["spec"]["r"], serde_json::json!(0.3));
        let back: MultiplexedState = serde_json::from_value(json).unwrap();
        assert_eq!(back, ms);
    }

    proptest! {
        #[test]
        fn pure_specs_have_unit_symplectic_eigenvalues(r in 0.0f64..2.0) {
            let cm = make_tmss(&SqueezingSpec::from_squeezing(r).unwrap());
            let [n1, n2] = cm.symplectic_eigenvalues();
            prop_assert!((n1 - 1.0).abs() < 1e-9, "n1 = {}", n1);
            prop_assert!((n2 - 1.0).abs() < 1e-9, "n2 = {}", n2);
        }

        #[test]
        fn tmss_blocks_and_determinant(v in 0.05f64..1.0, excess in 1.0f64..4.0) {
            let vp = excess / v;
            let spec = SqueezingSpec::new(v, vp).unwrap();
            let cm = make_tmss(&spec);
            prop_assert_eq!(cm.block_a(), cm.block_b());
            let (va, vc) = (spec.mean_variance(), spec.correlation());
            let expected = (va * va - vc * vc).powi(2);
            prop_assert!((cm.det() - expected).abs() <= 1e-9 * expected);
            prop_assert!((cm.det() - (v * vp).powi(2)).abs() <= 1e-9 * expected);
        }

        #[test]
        fn decibel_round_trip(exp in -6.0f64..6.0) {
            let v = 10f64.powf(exp);
            let back = db_to_linear(linear_to_db(v).unwrap());
            prop_assert!((back - v).abs() <= 1e-12 * v.max(1.0));
        }

        #[test]
        fn multiplexed_matches_single(r in 0.0f64..1.5, l in -5i32..5) {
            let spec = SqueezingSpec::from_squeezing(r).unwrap();
            let ms = make_multiplexed([(l, spec)]).unwrap();
            prop_assert_eq!(ms.get(l).unwrap().cm, make_tmss(&spec));
        }
    }
}
