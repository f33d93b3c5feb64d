//! Fourier coefficients of incident-field traces on every circle: the
//! right-hand sides of the boundary integral equations.

use crate::basis::{BlockLayout, CoeffVector};
use crate::error::{Error, Result};
use crate::geometry::DiskConfig;
use crate::scalar::{cplx, expi, Real, C};
use crate::specfun::{hankel1_values, CylinderFunctions};

/// An incident wave at wavenumber `k`.
#[derive(Debug, Clone, PartialEq)]
pub enum IncidentField<T> {
    /// `e^{ik (cos beta, sin beta) . x}`.
    PlaneWave { beta: T },
    /// Free-space Green's function `(i/4) H_0(k |x - s|)` centered at `s`.
    PointSource { s: [T; 2] },
    /// `sum_j h f_j e^{ik (cos alpha_j, sin alpha_j) . x}`.
    Herglotz {
        angles: Vec<T>,
        weights: Vec<C<T>>,
        h: T,
    },
}

/// Coefficients of the trace `U` and normal-derivative trace `dU` of the
/// incident field in the basis `e^{im theta_p} / sqrt(2 pi a_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Traces<T> {
    pub u: CoeffVector<T>,
    pub du: CoeffVector<T>,
}

impl<T: Real> Traces<T> {
    fn zeros(layout: &BlockLayout) -> Self {
        Self {
            u: CoeffVector::zeros(layout.clone()),
            du: CoeffVector::zeros(layout.clone()),
        }
    }

    fn axpy(&mut self, w: C<T>, other: &Traces<T>) {
        for (a, b) in self.u.values_mut().iter_mut().zip(other.u.values()) {
            *a += w * b;
        }
        for (a, b) in self.du.values_mut().iter_mut().zip(other.du.values()) {
            *a += w * b;
        }
    }
}

impl<T: Real> IncidentField<T> {
    pub fn plane_wave(beta: T) -> Self {
        IncidentField::PlaneWave { beta }
    }

    pub fn point_source(s: [T; 2]) -> Self {
        IncidentField::PointSource { s }
    }

    pub fn herglotz(angles: Vec<T>, weights: Vec<C<T>>, h: T) -> Result<Self> {
        if angles.is_empty() || angles.len() != weights.len() {
            return Err(Error::Dimension {
                expected: angles.len(),
                got: weights.len(),
            });
        }
        Ok(IncidentField::Herglotz { angles, weights, h })
    }

    pub fn traces(&self, config: &DiskConfig<T>, layout: &BlockLayout, k: T) -> Result<Traces<T>> {
        match self {
            IncidentField::PlaneWave { beta } => plane_wave_traces(config, layout, k, *beta),
            IncidentField::PointSource { s } => point_source_traces(config, layout, k, *s),
            IncidentField::Herglotz { angles, weights, h } => herglotz_traces(config, layout, k, angles, weights, *h),
        }
    }

    /// Value of the incident field at `x`.
    pub fn value(&self, k: T, x: [T; 2]) -> C<T> {
        match self {
            IncidentField::PlaneWave { beta } => plane(k, *beta, x),
            IncidentField::PointSource { s } => {
                let r = (x[0] - s[0]).hypot(x[1] - s[1]);
                let h0 = hankel1_values(k * r, 0)[0];
                cplx(T::zero(), T::lit(0.25)) * h0
            }
            IncidentField::Herglotz { angles, weights, h } => angles
                .iter()
                .zip(weights)
                .fold(cplx(T::zero(), T::zero()), |acc, (&a, &w)| acc + w * *h * plane(k, a, x)),
        }
    }

    /// Gradient of the incident field at `x`.
    pub fn gradient(&self, k: T, x: [T; 2]) -> [C<T>; 2] {
        match self {
            IncidentField::PlaneWave { beta } => plane_gradient(k, *beta, x, cplx(T::one(), T::zero())),
            IncidentField::PointSource { s } => {
                let d = [x[0] - s[0], x[1] - s[1]];
                let r = d[0].hypot(d[1]);
                let h1 = hankel1_values(k * r, 1)[1];
                // d/dR (i/4) H_0(kR) = -(i/4) k H_1(kR)
                let g = cplx(T::zero(), -T::lit(0.25) * k / r) * h1;
                [g * d[0], g * d[1]]
            }
            IncidentField::Herglotz { angles, weights, h } => {
                let zero = cplx(T::zero(), T::zero());
                angles.iter().zip(weights).fold([zero, zero], |acc, (&a, &w)| {
                    let g = plane_gradient(k, a, x, w * *h);
                    [acc[0] + g[0], acc[1] + g[1]]
                })
            }
        }
    }
}

fn plane_gradient<T: Real>(k: T, beta: T, x: [T; 2], w: C<T>) -> [C<T>; 2] {
    let (s, c) = beta.sin_cos();
    let v = plane(k, beta, x) * w * cplx(T::zero(), k);
    [v * c, v * s]
}

fn plane<T: Real>(k: T, beta: T, x: [T; 2]) -> C<T> {
    let (s, c) = beta.sin_cos();
    expi(k * (c * x[0] + s * x[1]))
}

fn check_layout<T: Real>(config: &DiskConfig<T>, layout: &BlockLayout) -> Result<()> {
    if config.len() != layout.num_disks() {
        return Err(Error::Dimension {
            expected: config.len(),
            got: layout.num_disks(),
        });
    }
    Ok(())
}

/// `U^p_m = d^p_m J_m(k a_p)`, `dU^p_m = k d^p_m J'_m(k a_p)` with
/// `d^p_m = sqrt(2 pi a_p) e^{ik beta.b_p} e^{im(pi/2 - beta)}`.
pub fn plane_wave_traces<T: Real>(config: &DiskConfig<T>, layout: &BlockLayout, k: T, beta: T) -> Result<Traces<T>> {
    check_layout(config, layout)?;
    let mut out = Traces::zeros(layout);
    for (p, d) in config.disks().iter().enumerate() {
        let cf = CylinderFunctions::new(k * d.a, layout.order(p))?;
        let amp = (T::TAU() * d.a).sqrt();
        let center = plane(k, beta, [d.x1, d.x2]) * amp;
        for (i, m) in layout.modes(p).enumerate() {
            let dm = center * expi(T::from_order(m) * (T::FRAC_PI_2() - beta));
            let g = layout.offsets()[p] + i;
            out.u.values_mut()[g] = dm * cf.j(m);
            out.du.values_mut()[g] = dm * (k * cf.dj(m));
        }
    }
    Ok(out)
}

/// Traces of `(i/4) H_0(k|x - s|)`; requires `s` outside every disk.
pub fn point_source_traces<T: Real>(config: &DiskConfig<T>, layout: &BlockLayout, k: T, s: [T; 2]) -> Result<Traces<T>> {
    check_layout(config, layout)?;
    if let Some(p) = config.disks().iter().position(|d| !(d.local_polar(s).0 > d.a)) {
        return Err(Error::Domain(format!("point source lies inside or on disk {p}")));
    }
    let mut out = Traces::zeros(layout);
    for (p, d) in config.disks().iter().enumerate() {
        let n = layout.order(p);
        let cf = CylinderFunctions::new(k * d.a, n)?;
        let (rs, ts) = d.local_polar(s);
        let hs = crate::specfun::hankel1_seq(k * rs, n)?;
        let c = cplx(T::zero(), T::FRAC_PI_2() * d.a) / (T::TAU() * d.a).sqrt();
        for (i, m) in layout.modes(p).enumerate() {
            let common = c * hs.at(m) * expi(-T::from_order(m) * ts);
            let g = layout.offsets()[p] + i;
            out.u.values_mut()[g] = common * cf.j(m);
            out.du.values_mut()[g] = common * (k * cf.dj(m));
        }
    }
    Ok(out)
}

/// `h`-weighted superposition of plane-wave traces.
pub fn herglotz_traces<T: Real>(
    config: &DiskConfig<T>,
    layout: &BlockLayout,
    k: T,
    angles: &[T],
    weights: &[C<T>],
    h: T,
) -> Result<Traces<T>> {
    if angles.is_empty() || angles.len() != weights.len() {
        return Err(Error::Dimension {
            expected: angles.len(),
            got: weights.len(),
        });
    }
    let mut out = Traces::zeros(layout);
    for (&a, &w) in angles.iter().zip(weights) {
        out.axpy(w * h, &plane_wave_traces(config, layout, k, a)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Disk;

    fn cfg() -> DiskConfig<f64> {
        DiskConfig::new(vec![Disk::new(0.0, 0.0, 0.7), Disk::new(2.0, -1.0, 0.4)]).unwrap()
    }

    #[test]
    fn plane_wave_centered_disk() {
        let c = cfg();
        let l = BlockLayout::from_orders(vec![5, 4]);
        let t = plane_wave_traces(&c, &l, 3.0, 0.4).unwrap();
        let j0 = crate::specfun::bessel_j_seq(2.1, 0).unwrap()[0];
        let want = (2.0 * std::f64::consts::PI * 0.7).sqrt() * j0;
        assert!((t.u.get(0, 0) - cplx(want, 0.0)).norm() < 1e-15);
        // |d^p_m| = sqrt(2 pi a_p)
        let cf = CylinderFunctions::new(3.0 * 0.4, 4).unwrap();
        for m in -4..=4 {
            let d = t.u.get(1, m) / cf.j(m);
            assert!((d.norm() - (2.0 * std::f64::consts::PI * 0.4).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn point_source_on_axis_phase() {
        let c = DiskConfig::new(vec![Disk::new(0.0, 0.0, 1.0)]).unwrap();
        let l = BlockLayout::from_orders(vec![3]);
        let t = point_source_traces(&c, &l, 1.0, [3.0, 0.0]).unwrap();
        let cf = CylinderFunctions::new(1.0, 3).unwrap();
        let h = crate::specfun::hankel1_seq(3.0, 3).unwrap();
        for m in -3..=3 {
            let want = cplx(0.0, std::f64::consts::FRAC_PI_2) * cf.j(m) * h.at(m) / (2.0 * std::f64::consts::PI).sqrt();
            assert!((t.u.get(0, m) - want).norm() < 1e-15);
        }
        assert!(point_source_traces(&c, &l, 1.0, [0.5, 0.0]).is_err());
        assert!(point_source_traces(&c, &l, 1.0, [1.0, 0.0]).is_err());
    }

    #[test]
    fn point_source_decay() {
        let c = DiskConfig::new(vec![Disk::new(0.0, 0.0, 1.0)]).unwrap();
        let l = BlockLayout::from_orders(vec![2]);
        let r = 200.0;
        let near = point_source_traces(&c, &l, 1.0, [r, 0.0]).unwrap();
        let far = point_source_traces(&c, &l, 1.0, [4.0 * r, 0.0]).unwrap();
        for m in -2..=2 {
            let ratio = near.u.get(0, m).norm() / far.u.get(0, m).norm();
            assert!((ratio - 2.0_f64).abs() < 0.1, "m={m} ratio {ratio}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let k = 2.5_f64;
        let fields = [
            IncidentField::plane_wave(0.7),
            IncidentField::point_source([-1.0, 0.5]),
            IncidentField::herglotz(vec![0.1, 2.0, 4.0], vec![cplx(1.0, 0.5), cplx(-0.3, 0.2), cplx(0.0, 1.0)], 0.4).unwrap(),
        ];
        let x = [0.8, -0.3];
        let h = 1e-5;
        for f in &fields {
            let g = f.gradient(k, x);
            for (axis, gi) in g.iter().enumerate() {
                let (mut xp, mut xm) = (x, x);
                xp[axis] += h;
                xm[axis] -= h;
                let fd = (f.value(k, xp) - f.value(k, xm)) / (2.0 * h);
                assert!((fd - gi).norm() < 1e-8 * gi.norm().max(1.0), "{f:?} axis {axis}: {fd} vs {gi}");
            }
        }
    }

    #[test]
    fn herglotz_reductions() {
        let c = cfg();
        let l = BlockLayout::from_orders(vec![4, 4]);
        let k = 2.0;
        let single = herglotz_traces(&c, &l, k, &[0.3], &[cplx(1.0, 0.0)], 1.0).unwrap();
        assert_eq!(single, plane_wave_traces(&c, &l, k, 0.3).unwrap());
        let zero = herglotz_traces(&c, &l, k, &[0.3, 1.0], &[cplx(0.0, 0.0); 2], 0.5).unwrap();
        assert!(zero.u.values().iter().chain(zero.du.values()).all(|z| z.norm() == 0.0));
        let w = [cplx(0.2, 1.0), cplx(-0.7, 0.1)];
        let two = herglotz_traces(&c, &l, k, &[0.3, 2.0], &w, 0.25).unwrap();
        let a = herglotz_traces(&c, &l, k, &[0.3], &w[..1], 0.25).unwrap();
        let b = herglotz_traces(&c, &l, k, &[2.0], &w[1..], 0.25).unwrap();
        for i in 0..l.total() {
            assert!((two.u.values()[i] - a.u.values()[i] - b.u.values()[i]).norm() < 1e-15);
        }
        assert!(herglotz_traces(&c, &l, k, &[0.3, 2.0], &w[..1], 0.25).is_err());
    }
}
