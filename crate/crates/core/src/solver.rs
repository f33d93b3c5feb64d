//! Dense LU with partial pivoting and restarted, left-preconditioned GMRES.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operators::{DenseOperator, LinearOperator};
use crate::scalar::{dotc, norm2, Real, C};

/// `PA = LU` of a square dense matrix; `L` has a unit diagonal.
#[derive(Debug, Clone)]
pub struct LuFactorization<T> {
    n: usize,
    lu: Vec<C<T>>,
    perm: Vec<usize>,
}

impl<T: Real> LuFactorization<T> {
    pub fn new(a: &DenseOperator<T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: a.ncols(),
            });
        }
        let mut lu = a.data().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let amax = lu.iter().fold(T::zero(), |m, z| m.max(z.norm()));
        let tiny = T::from_count(n.max(1)) * T::epsilon() * amax;
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax > tiny) {
                return Err(Error::Singular(k));
            }
            if piv != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let inv = C::new(T::one(), T::zero()) / lu[k * n + k];
            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..(k + 1) * n];
            tail.par_chunks_mut(n).for_each(|row| {
                let f = row[k] * inv;
                row[k] = f;
                if f.re == T::zero() && f.im == T::zero() {
                    return;
                }
                for j in k + 1..n {
                    row[j] -= f * pivot_row[j];
                }
            });
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(b.len(), self.n, "lu solve: rhs length");
        let n = self.n;
        let mut x: Vec<C<T>> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s = row.iter().zip(&x[..i]).fold(C::new(T::zero(), T::zero()), |acc, (l, v)| acc + l * v);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s = row.iter().zip(&x[i + 1..]).fold(C::new(T::zero(), T::zero()), |acc, (u, v)| acc + u * v);
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    /// Solves for several right-hand sides in parallel.
    pub fn solve_many(&self, rhs: &[Vec<C<T>>]) -> Vec<Vec<C<T>>> {
        rhs.par_iter().map(|b| self.solve(b)).collect()
    }
}

/// `||A x - b|| / ||b||` (zero when `b` is zero and `A x` is too).
pub fn relative_residual<T: Real, A: LinearOperator<T> + ?Sized>(a: &A, x: &[C<T>], b: &[C<T>]) -> T {
    let r: Vec<C<T>> = a.apply(x).iter().zip(b).map(|(ax, bi)| ax - bi).collect();
    let nb = norm2(b);
    if nb == T::zero() {
        norm2(&r)
    } else {
        norm2(&r) / nb
    }
}

/// Gaussian elimination with partial pivoting; returns the solution and its
/// relative residual.
pub fn solve_direct<T: Real>(a: &DenseOperator<T>, b: &[C<T>]) -> Result<(Vec<C<T>>, T)> {
    if b.len() != a.nrows() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let x = LuFactorization::new(a)?.solve(b);
    let res = relative_residual(a, &x, b);
    Ok((x, res))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions<T> {
    /// Krylov dimension per cycle.
    pub restart: usize,
    pub tol: T,
    /// Maximum number of restart cycles.
    pub max_cycles: usize,
}

impl<T: Real> Default for GmresOptions<T> {
    fn default() -> Self {
        Self {
            restart: 50,
            tol: T::lit(1e-10),
            max_cycles: 1000,
        }
    }
}

/// One inner iteration: cycle index, global iteration count, estimated
/// relative residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRecord<T> {
    pub cycle: usize,
    pub iteration: usize,
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats<T> {
    pub converged: bool,
    /// Restart cycles started.
    pub cycles: usize,
    /// Total inner iterations (operator applications inside cycles).
    pub iterations: usize,
    /// Final relative residual of the (preconditioned) system.
    pub residual: T,
    pub elapsed: Duration,
    pub history: Vec<ResidualRecord<T>>,
}

/// Restarted GMRES on `P^{-1} A x = P^{-1} b`, where `precond` applies
/// `P^{-1}`. Stops when `||P^{-1}(b - A x)|| <= tol ||P^{-1} b||` or after
/// `max_cycles` cycles; the best iterate is returned either way.
pub fn gmres<T, A, P>(
    a: &A,
    b: &[C<T>],
    x0: Option<&[C<T>]>,
    opts: &GmresOptions<T>,
    precond: Option<&P>,
) -> (Vec<C<T>>, SolveStats<T>)
where
    T: Real,
    A: LinearOperator<T> + ?Sized,
    P: LinearOperator<T> + ?Sized,
{
    let start = Instant::now();
    let n = b.len();
    let zero = C::new(T::zero(), T::zero());
    let prec = |v: Vec<C<T>>| -> Vec<C<T>> {
        match precond {
            Some(p) => p.apply(&v),
            None => v,
        }
    };
    let mut x: Vec<C<T>> = x0.map_or_else(|| vec![zero; n], <[C<T>]>::to_vec);
    let pb = prec(b.to_vec());
    let nb = norm2(&pb);
    let mut stats = SolveStats {
        converged: false,
        cycles: 0,
        iterations: 0,
        residual: T::zero(),
        elapsed: Duration::ZERO,
        history: Vec::new(),
    };
    if nb == T::zero() {
        x.iter_mut().for_each(|v| *v = zero);
        stats.converged = true;
        stats.elapsed = start.elapsed();
        return (x, stats);
    }
    let m = opts.restart.max(1).min(n.max(1));
    let residual_of = |x: &[C<T>]| -> Vec<C<T>> {
        let ax = a.apply(x);
        prec(b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect())
    };
    let mut r = residual_of(&x);
    let mut beta = norm2(&r);
    stats.residual = beta / nb;
    while stats.cycles < opts.max_cycles && stats.residual > opts.tol {
        stats.cycles += 1;
        let mut v: Vec<Vec<C<T>>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|z| z / beta).collect());
        // Hessenberg columns after rotation, upper-triangular part only
        let mut h: Vec<Vec<C<T>>> = Vec::with_capacity(m);
        let mut rot: Vec<(T, C<T>)> = Vec::with_capacity(m);
        let mut g = vec![zero; m + 1];
        g[0] = C::new(beta, T::zero());
        let mut steps = 0;
        for j in 0..m {
            let mut w = prec(a.apply(&v[j]));
            let mut col = vec![zero; j + 2];
            // modified Gram-Schmidt, two passes
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let hij = dotc(vi, &w);
                    col[i] += hij;
                    for (wk, vk) in w.iter_mut().zip(vi) {
                        *wk -= hij * vk;
                    }
                }
            }
            let hn = norm2(&w);
            col[j + 1] = C::new(hn, T::zero());
            for (i, &(c, s)) in rot.iter().enumerate() {
                let (x1, x2) = (col[i], col[i + 1]);
                col[i] = x1 * c + s * x2;
                col[i + 1] = -s.conj() * x1 + x2 * c;
            }
            let (c, s) = givens(col[j], col[j + 1]);
            col[j] = col[j] * c + s * col[j + 1];
            col[j + 1] = zero;
            let gj = g[j];
            g[j] = gj * c;
            g[j + 1] = -s.conj() * gj;
            rot.push((c, s));
            col.truncate(j + 1);
            h.push(col);
            steps = j + 1;
            stats.iterations += 1;
            let est = g[j + 1].norm() / nb;
            stats.history.push(ResidualRecord {
                cycle: stats.cycles,
                iteration: stats.iterations,
                residual: est,
            });
            if est <= opts.tol || hn == T::zero() {
                break;
            }
            v.push(w.into_iter().map(|z| z / hn).collect());
        }
        // back substitution on the rotated triangular system
        let mut y = vec![zero; steps];
        for i in (0..steps).rev() {
            let mut s = g[i];
            for k in i + 1..steps {
                s -= h[k][i] * y[k];
            }
            y[i] = s / h[i][i];
        }
        for (yi, vi) in y.iter().zip(&v) {
            for (xk, vk) in x.iter_mut().zip(vi) {
                *xk += yi * vk;
            }
        }
        r = residual_of(&x);
        beta = norm2(&r);
        stats.residual = beta / nb;
        log::info!(
            "gmres cycle {} iterations {} residual {:.3e}",
            stats.cycles,
            stats.iterations,
            stats.residual.to_f64().unwrap_or(f64::NAN)
        );
        if beta == T::zero() {
            break;
        }
    }
    stats.converged = stats.residual <= opts.tol;
    stats.elapsed = start.elapsed();
    (x, stats)
}

/// Complex Givens rotation `(c, s)` with real `c`, zeroing `b` in `(a, b)`.
fn givens<T: Real>(a: C<T>, b: C<T>) -> (T, C<T>) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == T::zero() {
        return (T::one(), C::new(T::zero(), T::zero()));
    }
    if na == T::zero() {
        return (T::zero(), C::new(T::one(), T::zero()));
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::FnOperator;
    use rand::{Rng, SeedableRng};

    fn random_system(n: usize, seed: u64) -> (DenseOperator<f64>, Vec<C<f64>>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut data: Vec<C<f64>> = (0..n * n).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        for i in 0..n {
            data[i * n + i] += C::new(2.0 * (n as f64).sqrt(), 0.0);
        }
        let b = (0..n).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        (DenseOperator::from_row_major(n, n, data).unwrap(), b)
    }

    #[test]
    fn direct_identity_and_diagonal() {
        let b: Vec<C<f64>> = (0..5).map(|i| C::new(i as f64, 1.0)).collect();
        let (x, res) = solve_direct(&DenseOperator::identity(5), &b).unwrap();
        assert_eq!(x, b);
        assert_eq!(res, 0.0);
        let mut d = DenseOperator::zeros(5, 5);
        for i in 0..5 {
            d.set(i, i, C::new(1.0 + i as f64, -0.5));
        }
        let (x, _) = solve_direct(&d, &b).unwrap();
        for i in 0..5 {
            assert!((x[i] - b[i] / d.get(i, i)).norm() < 1e-15);
        }
    }

    #[test]
    fn direct_random_residual() {
        let (a, b) = random_system(50, 1);
        let (_, res) = solve_direct(&a, &b).unwrap();
        assert!(res <= 1e-12, "residual {res:e}");
    }

    #[test]
    fn direct_detects_singular() {
        let a = DenseOperator::<f64>::zeros(3, 3);
        assert!(matches!(solve_direct(&a, &[C::new(1.0, 0.0); 3]), Err(Error::Singular(0))));
    }

    #[test]
    fn gmres_identity_one_step() {
        let b: Vec<C<f64>> = (0..7).map(|i| C::new(i as f64, -1.0)).collect();
        let (x, st) = gmres::<f64, _, DenseOperator<f64>>(&DenseOperator::identity(7), &b, None, &GmresOptions::default(), None);
        assert!(st.converged);
        assert_eq!(st.iterations, 1);
        for (a, b) in x.iter().zip(&b) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn gmres_zero_rhs() {
        let b = vec![C::new(0.0, 0.0); 4];
        let (x, st) = gmres::<f64, _, DenseOperator<f64>>(&DenseOperator::identity(4), &b, None, &GmresOptions::default(), None);
        assert!(st.converged && st.iterations == 0);
        assert!(x.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn gmres_matches_direct_without_restart() {
        let (a, b) = random_system(40, 2);
        let (xd, _) = solve_direct(&a, &b).unwrap();
        let opts = GmresOptions {
            restart: 40,
            tol: 1e-12,
            max_cycles: 5,
        };
        let (x, st) = gmres::<f64, _, DenseOperator<f64>>(&a, &b, None, &opts, None);
        assert!(st.converged);
        let d: Vec<C<f64>> = x.iter().zip(&xd).map(|(p, q)| p - q).collect();
        assert!(norm2(&d) / norm2(&xd) < 1e-10);
        // residual estimates nonincreasing inside a cycle
        for w in st.history.windows(2) {
            if w[0].cycle == w[1].cycle {
                assert!(w[1].residual <= w[0].residual * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn gmres_restarted_and_preconditioned() {
        let n = 60;
        let diag: Vec<C<f64>> = (0..n).map(|i| C::new(1.0 + i as f64, 0.0)).collect();
        let dd = diag.clone();
        let a = FnOperator {
            n,
            f: move |x: &[C<f64>], y: &mut [C<f64>]| {
                for i in 0..x.len() {
                    y[i] = dd[i] * x[i];
                }
            },
        };
        let b: Vec<C<f64>> = (0..n).map(|i| C::new(1.0, i as f64 * 0.1)).collect();
        let opts = GmresOptions {
            restart: 5,
            tol: 1e-10,
            max_cycles: 200,
        };
        let (x, st) = gmres::<f64, _, DenseOperator<f64>>(&a, &b, None, &opts, None);
        assert!(st.converged, "{st:?}");
        assert!(st.cycles > 1);
        for i in 0..n {
            assert!((x[i] - b[i] / diag[i]).norm() <= 1e-8 * (b[i] / diag[i]).norm());
        }
        let inv = diag.clone();
        let p = FnOperator {
            n,
            f: move |x: &[C<f64>], y: &mut [C<f64>]| {
                for i in 0..x.len() {
                    y[i] = x[i] / inv[i];
                }
            },
        };
        let (_, sp) = gmres(&a, &b, None, &opts, Some(&p));
        assert!(sp.converged && sp.iterations == 1);
    }

    #[test]
    fn gmres_reports_nonconvergence() {
        let (a, b) = random_system(30, 3);
        let opts = GmresOptions {
            restart: 2,
            tol: 1e-14,
            max_cycles: 2,
        };
        let (_, st) = gmres::<f64, _, DenseOperator<f64>>(&a, &b, None, &opts, None);
        assert!(!st.converged);
        assert_eq!(st.cycles, 2);
        assert!(st.residual < 1.0);
    }
}
