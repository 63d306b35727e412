//! Univariate and tensor-product B-spline bases on open knot vectors.
//!
//! Everything here works on the unit parameter interval: knot vectors start
//! at 0 and end at 1 with endpoint multiplicity `degree + 1`. Evaluation uses
//! the Cox–de Boor recursion restricted to the `degree + 1` functions that
//! are nonzero on the containing span; derivatives use the standard
//! basis-derivative recursion. Knot insertion (Boehm's rule) updates control
//! nets so refined geometry reproduces the original exactly.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SplineError {
    #[error("degree must be at least 1, got {0}")]
    InvalidDegree(usize),
    #[error("knot vector is invalid: {0}")]
    InvalidKnots(String),
    #[error("parameter {0} lies outside [0, 1]")]
    ParameterOutOfDomain(f64),
    #[error("derivative order {order} exceeds degree {degree}")]
    DerivativeOrderTooHigh { order: usize, degree: usize },
}

/// An open knot vector on [0, 1] together with its polynomial degree.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

/// Nonzero basis values on one span: functions `first..first + degree + 1`.
#[derive(Debug, Clone)]
pub struct BasisValues {
    pub first: usize,
    pub values: Vec<f64>,
}

/// Nonzero basis values and derivatives. `rows[k][j]` is the k-th derivative
/// of function `first + j`; row 0 holds the values themselves.
#[derive(Debug, Clone)]
pub struct BasisDerivatives {
    pub first: usize,
    pub rows: Vec<Vec<f64>>,
}

impl KnotVector {
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self, SplineError> {
        if degree < 1 {
            return Err(SplineError::InvalidDegree(degree));
        }
        let m = knots.len();
        if m < 2 * (degree + 1) {
            return Err(SplineError::InvalidKnots(format!(
                "need at least {} knots for degree {}, got {}",
                2 * (degree + 1),
                degree,
                m
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(SplineError::InvalidKnots("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(SplineError::InvalidKnots("knots must be non-decreasing".into()));
        }
        if knots[0] != 0.0 || knots[m - 1] != 1.0 {
            return Err(SplineError::InvalidKnots(
                "knot vector must span exactly [0, 1]".into(),
            ));
        }
        if knots[degree] != 0.0 || knots[degree + 1] == 0.0 {
            return Err(SplineError::InvalidKnots(format!(
                "first knot must have multiplicity exactly {}",
                degree + 1
            )));
        }
        if knots[m - 1 - degree] != 1.0 || knots[m - 2 - degree] == 1.0 {
            return Err(SplineError::InvalidKnots(format!(
                "last knot must have multiplicity exactly {}",
                degree + 1
            )));
        }
        // interior multiplicities may not exceed degree + 1
        let mut run = 1usize;
        for i in degree + 1..m - degree - 1 {
            if knots[i] == knots[i - 1] {
                run += 1;
                if run > degree + 1 {
                    return Err(SplineError::InvalidKnots(format!(
                        "interior knot {} has multiplicity > {}",
                        knots[i],
                        degree + 1
                    )));
                }
            } else {
                run = 1;
            }
        }
        Ok(Self { degree, knots })
    }

    /// Open knot vector with `spans` equal-width non-empty spans.
    pub fn open_uniform(degree: usize, spans: usize) -> Result<Self, SplineError> {
        if spans == 0 {
            return Err(SplineError::InvalidKnots("need at least one span".into()));
        }
        let mut knots = vec![0.0; degree + 1];
        for i in 1..spans {
            knots.push(i as f64 / spans as f64);
        }
        knots.extend(std::iter::repeat(1.0).take(degree + 1));
        Self::new(degree, knots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions n (knot count = n + degree + 1).
    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Distinct knot values, ascending.
    pub fn breaks(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &k in &self.knots {
            if out.last().is_none_or(|&last| k > last) {
                out.push(k);
            }
        }
        out
    }

    /// Non-empty spans as (start, end) pairs.
    pub fn spans(&self) -> Vec<(f64, f64)> {
        self.breaks().windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Index s with knots[s] <= xi < knots[s+1]; xi = 1 maps to the last
    /// non-empty span.
    pub fn find_span(&self, xi: f64) -> Result<usize, SplineError> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(SplineError::ParameterOutOfDomain(xi));
        }
        let n = self.num_basis();
        let p = self.degree;
        if xi >= self.knots[n] {
            // xi == 1: last non-empty span (knots[n-1] < 1 for open vectors)
            return Ok(n - 1);
        }
        let mut lo = p;
        let mut hi = n;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if xi < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(lo)
    }

    /// The degree + 1 basis values that are nonzero at xi (Cox–de Boor).
    pub fn eval_basis(&self, xi: f64) -> Result<BasisValues, SplineError> {
        let span = self.find_span(xi)?;
        let p = self.degree;
        let k = &self.knots;
        let mut values = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        values[0] = 1.0;
        for j in 1..=p {
            left[j] = xi - k[span + 1 - j];
            right[j] = k[span + j] - xi;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = values[r] / (right[r + 1] + left[j - r]);
                values[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            values[j] = saved;
        }
        Ok(BasisValues { first: span - p, values })
    }

    /// Values and derivatives up to `max_order` of the nonzero functions.
    pub fn eval_basis_derivs(
        &self,
        xi: f64,
        max_order: usize,
    ) -> Result<BasisDerivatives, SplineError> {
        let p = self.degree;
        if max_order > p {
            return Err(SplineError::DerivativeOrderTooHigh { order: max_order, degree: p });
        }
        let span = self.find_span(xi)?;
        let k = &self.knots;

        // Triangular table of all lower-degree basis values plus the knot
        // differences, as in the standard derivative algorithm.
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = xi - k[span + 1 - j];
            right[j] = k[span + j] - xi;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        let mut rows = vec![vec![0.0; p + 1]; max_order + 1];
        for (j, row0) in rows[0].iter_mut().enumerate() {
            *row0 = ndu[j][p];
        }

        let mut a = [vec![0.0; p + 1], vec![0.0; p + 1]];
        for r in 0..=p {
            let mut s1 = 0;
            let mut s2 = 1;
            a[0][0] = 1.0;
            for order in 1..=max_order {
                let mut d = 0.0;
                let rk = r as isize - order as isize;
                let pk = p - order;
                if r >= order {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize { order - 1 } else { p - r };
                for j in j1..=j2 {
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][(rk + j as isize) as usize];
                    d += a[s2][j] * ndu[(rk + j as isize) as usize][pk];
                }
                if r <= pk {
                    a[s2][order] = -a[s1][order - 1] / ndu[pk + 1][r];
                    d += a[s2][order] * ndu[r][pk];
                }
                rows[order][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }

        // scale row k by p!/(p-k)!
        let mut factor = p as f64;
        for (order, row) in rows.iter_mut().enumerate().skip(1) {
            for v in row.iter_mut() {
                *v *= factor;
            }
            factor *= p.saturating_sub(order) as f64;
        }
        Ok(BasisDerivatives { first: span - p, rows })
    }

    /// Dyadic refinement: insert the midpoint of every non-empty span,
    /// repeated `levels` times. Inserted knots have multiplicity 1.
    pub fn refine_dyadic(&self, levels: usize) -> KnotVector {
        let mut knots = self.knots.clone();
        for _ in 0..levels {
            let mut next = Vec::with_capacity(knots.len() * 2);
            for w in knots.windows(2) {
                next.push(w[0]);
                if w[1] > w[0] {
                    next.push(0.5 * (w[0] + w[1]));
                }
            }
            next.push(*knots.last().expect("non-empty"));
            knots = next;
        }
        KnotVector { degree: self.degree, knots }
    }

    /// Knots of `self.refine_dyadic(levels)` that are not in `self`,
    /// ascending. Convenience for geometry refinement via insertion.
    pub fn dyadic_insertions(&self, levels: usize) -> Vec<f64> {
        let refined = self.refine_dyadic(levels);
        let mut inserted = Vec::new();
        let mut have = self.knots.clone();
        for &u in refined.knots() {
            if let Some(pos) = have.iter().position(|&v| v == u) {
                have.remove(pos);
            } else {
                inserted.push(u);
            }
        }
        inserted
    }
}

/// Boehm single-knot insertion for control points in R^N. Returns the new
/// knot vector and updated control points; the represented curve is
/// unchanged.
pub fn insert_knot<const N: usize>(
    kv: &KnotVector,
    ctrl: &[[f64; N]],
    u: f64,
) -> Result<(KnotVector, Vec<[f64; N]>), SplineError> {
    let n = kv.num_basis();
    if ctrl.len() != n {
        return Err(SplineError::InvalidKnots(format!(
            "control point count {} does not match basis count {}",
            ctrl.len(),
            n
        )));
    }
    let p = kv.degree;
    let span = kv.find_span(u)?;
    let k = kv.knots();

    let mut new_ctrl = Vec::with_capacity(n + 1);
    new_ctrl.extend_from_slice(&ctrl[..=span - p]);
    for i in span - p + 1..=span {
        let denom = k[i + p] - k[i];
        let a = if denom > 0.0 { (u - k[i]) / denom } else { 0.0 };
        let mut q = [0.0; N];
        for d in 0..N {
            q[d] = (1.0 - a) * ctrl[i - 1][d] + a * ctrl[i][d];
        }
        new_ctrl.push(q);
    }
    new_ctrl.extend_from_slice(&ctrl[span..]);

    let mut knots = k.to_vec();
    knots.insert(span + 1, u);
    Ok((KnotVector { degree: p, knots }, new_ctrl))
}

/// Single degree-elevation step for a one-span (Bezier) segment in R^N.
pub fn elevate_bezier<const N: usize>(ctrl: &[[f64; N]]) -> Vec<[f64; N]> {
    let q = ctrl.len() - 1; // current degree
    let mut out = Vec::with_capacity(q + 2);
    out.push(ctrl[0]);
    for k in 1..=q {
        let a = k as f64 / (q + 1) as f64;
        let mut pt = [0.0; N];
        for d in 0..N {
            pt[d] = a * ctrl[k - 1][d] + (1.0 - a) * ctrl[k][d];
        }
        out.push(pt);
    }
    out.push(ctrl[q]);
    out
}

/// Nonzero bivariate values and parametric gradients at one point.
#[derive(Debug, Clone)]
pub struct TensorValues {
    /// First nonzero function index per direction.
    pub first: [usize; 2],
    /// Nonzero counts per direction (degree + 1 each).
    pub counts: [usize; 2],
    /// Values, local index a + b * counts[0].
    pub values: Vec<f64>,
    /// Parametric gradients (d/dxi1, d/dxi2), same ordering.
    pub grads: Vec<[f64; 2]>,
}

impl TensorValues {
    /// Global flat index of local function (a, b) given n1 functions in
    /// direction 1 (index i1 runs fastest).
    pub fn global_index(&self, local: usize, n1: usize) -> usize {
        let a = local % self.counts[0];
        let b = local / self.counts[0];
        (self.first[1] + b) * n1 + self.first[0] + a
    }
}

/// Tensor-product basis over two open knot vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorBasis {
    kv: [KnotVector; 2],
}

impl TensorBasis {
    pub fn new(kv1: KnotVector, kv2: KnotVector) -> Self {
        Self { kv: [kv1, kv2] }
    }

    pub fn kv(&self, dir: usize) -> &KnotVector {
        &self.kv[dir]
    }

    pub fn degrees(&self) -> [usize; 2] {
        [self.kv[0].degree(), self.kv[1].degree()]
    }

    pub fn num_basis_dir(&self, dir: usize) -> usize {
        self.kv[dir].num_basis()
    }

    pub fn num_basis(&self) -> usize {
        self.kv[0].num_basis() * self.kv[1].num_basis()
    }

    /// Values and parametric gradients of the nonzero bivariate functions.
    pub fn eval(&self, xi: [f64; 2]) -> Result<TensorValues, SplineError> {
        let d1 = self.kv[0].eval_basis_derivs(xi[0], 1)?;
        let d2 = self.kv[1].eval_basis_derivs(xi[1], 1)?;
        let c1 = self.kv[0].degree() + 1;
        let c2 = self.kv[1].degree() + 1;
        let mut values = Vec::with_capacity(c1 * c2);
        let mut grads = Vec::with_capacity(c1 * c2);
        for b in 0..c2 {
            for a in 0..c1 {
                values.push(d1.rows[0][a] * d2.rows[0][b]);
                grads.push([d1.rows[1][a] * d2.rows[0][b], d1.rows[0][a] * d2.rows[1][b]]);
            }
        }
        Ok(TensorValues {
            first: [d1.first, d2.first],
            counts: [c1, c2],
            values,
            grads,
        })
    }

    pub fn refine_dyadic(&self, levels: [usize; 2]) -> TensorBasis {
        TensorBasis::new(
            self.kv[0].refine_dyadic(levels[0]),
            self.kv[1].refine_dyadic(levels[1]),
        )
    }
}
