//! Dense LU with partial pivoting for the small MNA systems (tens of unknowns).

use alloc::vec;
use alloc::vec::Vec;

/// Row-major square matrix.
#[derive(Debug, Clone)]
pub(crate) struct Dense {
    n: usize,
    a: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense {
            n,
            a: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        self.a[r * self.n + c] += v;
    }

    /// Solve `A x = b` in place (A is destroyed). On a zero pivot returns the
    /// index of the unknown whose column could not be eliminated.
    pub fn solve(mut self, b: &mut [f64]) -> Result<(), usize> {
        let n = self.n;
        let a = &mut self.a;
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|r| (r, a[r * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pv <= scale * 1e-18 || !pv.is_finite() {
                return Err(k);
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                b.swap(k, p);
            }
            let piv = a[k * n + k];
            for r in k + 1..n {
                let f = a[r * n + k] / piv;
                if f == 0.0 {
                    continue;
                }
                a[r * n + k] = 0.0;
                for c in k + 1..n {
                    a[r * n + c] -= f * a[k * n + c];
                }
                b[r] -= f * b[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for c in k + 1..n {
                s -= a[k * n + c] * b[c];
            }
            b[k] = s / a[k * n + k];
        }
        Ok(())
    }
}
