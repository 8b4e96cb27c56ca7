use crate::discretization::FormMatrices;
use crate::error::{check_len, Error, Result};
use crate::scalar::Real;

/// Discrete path on the unit sphere from `−φ₁` to `φ₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble<T> {
    pub nodes: Vec<Vec<T>>,
}

impl<T: Real> PathEnsemble<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest `L²` distance between consecutive nodes and the total length.
    pub fn spacing(&self, forms: &FormMatrices<T>) -> (T, T) {
        let mut worst = T::zero();
        let mut total = T::zero();
        for w in self.nodes.windows(2) {
            let d: Vec<T> = w[1].iter().zip(&w[0]).map(|(&a, &b)| a - b).collect();
            let len = forms.mass_norm(&d);
            worst = worst.max(len);
            total += len;
        }
        (worst, total)
    }
}

fn normalized<T: Real>(forms: &FormMatrices<T>, u: Vec<T>) -> Result<Vec<T>> {
    let n = forms.mass_norm(&u);
    if !(n > T::zero()) || !n.is_finite() {
        return Err(Error::InvalidInput("path passes through the zero vector".into()));
    }
    Ok(u.into_iter().map(|x| x / n).collect())
}

/// `m` normalized nodes along `−φ₁ → seed → φ₁`, equally spaced in arclength.
pub fn initial_path<T: Real>(
    forms: &FormMatrices<T>,
    phi1: &[T],
    seed: &[T],
    m: usize,
) -> Result<PathEnsemble<T>> {
    let n = forms.n();
    check_len(n, phi1.len())?;
    check_len(n, seed.len())?;
    if m < 3 {
        return Err(Error::InvalidInput(format!("a path needs at least 3 nodes, got {m}")));
    }
    let phi = normalized(forms, phi1.to_vec())?;
    let apex = normalized(forms, seed.to_vec())?;
    let overlap = forms.mass_inner(&phi, &apex).abs();
    if overlap > T::one() - T::lit(1e-8) {
        return Err(Error::InvalidInput("seed is parallel to the first eigenfunction".into()));
    }
    let neg: Vec<T> = phi.iter().map(|&x| -x).collect();

    let per_segment = 8 * m;
    let mut dense = Vec::with_capacity(2 * per_segment + 1);
    for (from, to, first) in [(&neg, &apex, true), (&apex, &phi, false)] {
        let start = if first { 0 } else { 1 };
        for k in start..=per_segment {
            let t = T::of(k) / T::of(per_segment);
            let u: Vec<T> = from.iter().zip(to.iter()).map(|(&a, &b)| a * (T::one() - t) + b * t).collect();
            dense.push(normalized(forms, u)?);
        }
    }
    let mut s = vec![T::zero(); dense.len()];
    for i in 1..dense.len() {
        let d: Vec<T> = dense[i].iter().zip(&dense[i - 1]).map(|(&a, &b)| a - b).collect();
        s[i] = s[i - 1] + forms.mass_norm(&d);
    }
    let total = s[dense.len() - 1];
    let mut nodes = Vec::with_capacity(m);
    nodes.push(neg.clone());
    let mut seg = 0;
    for j in 1..m - 1 {
        let target = total * T::of(j) / T::of(m - 1);
        while seg + 2 < dense.len() && s[seg + 1] < target {
            seg += 1;
        }
        let len = s[seg + 1] - s[seg];
        let theta = if len > T::zero() { (target - s[seg]) / len } else { T::zero() };
        let u: Vec<T> = dense[seg]
            .iter()
            .zip(&dense[seg + 1])
            .map(|(&a, &b)| a * (T::one() - theta) + b * theta)
            .collect();
        nodes.push(normalized(forms, u)?);
    }
    nodes.push(phi);
    Ok(PathEnsemble { nodes })
}
