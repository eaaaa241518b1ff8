//! Local coherence `D S D` and local partial coherence `-H S^{-1} H` of a
//! spectrum estimate, slice by slice.

use crate::array::{ArrayKind, MvLswArray};
use crate::error::{Error, Result};
use crate::matops::sym_inverse;

/// Coherence `rho_j(k) = D S_j(k) D` with `D = diag(S^{(p,p)})^{-1/2}`.
/// Diagonal entries are exactly one.
pub fn coherence(s: &MvLswArray) -> Result<MvLswArray> {
    let (p, levels, t) = s.dims();
    let mut out = MvLswArray::zeros(p, levels, t, ArrayKind::Coherence, s.meta.clone());
    let mut scale = vec![0.0; p];
    for j in 0..levels {
        for k in 0..t {
            for (c, d) in scale.iter_mut().enumerate() {
                let v = s.get(c, c, j, k);
                if !(v > 0.0) {
                    return Err(Error::ZeroDiagonal {
                        channel: c,
                        level: j,
                        location: k,
                    });
                }
                *d = 1.0 / v.sqrt();
            }
            for a in 0..p {
                out.set(a, a, j, k, 1.0);
                for b in a + 1..p {
                    let r = scale[a] * s.get(a, b, j, k) * scale[b];
                    out.set(a, b, j, k, r.clamp(-1.0, 1.0));
                }
            }
        }
    }
    Ok(out)
}

/// Partial coherence `Gamma_j(k) = -H G H` with `G = S_j(k)^{-1}` and
/// `H = diag(G^{(p,p)})^{-1/2}`. Diagonal entries are exactly minus one.
pub fn partial_coherence(s: &MvLswArray) -> Result<MvLswArray> {
    let (p, levels, t) = s.dims();
    let mut out = MvLswArray::zeros(p, levels, t, ArrayKind::PartialCoherence, s.meta.clone());
    let mut scale = vec![0.0; p];
    for j in 0..levels {
        for k in 0..t {
            let g = sym_inverse(&s.slice(j, k))?;
            for (c, h) in scale.iter_mut().enumerate() {
                *h = 1.0 / g.get(c, c).sqrt();
            }
            for a in 0..p {
                out.set(a, a, j, k, -1.0);
                for b in a + 1..p {
                    let r = -scale[a] * g.get(a, b) * scale[b];
                    out.set(a, b, j, k, r.clamp(-1.0, 1.0));
                }
            }
        }
    }
    Ok(out)
}
