//! Ideal-gas Euler state algebra.
//!
//! States are always stored with two momentum components; one-dimensional
//! runs carry a zero `rho v` that no flux ever changes.

use crate::error::PhysicsError;

/// Number of stored conserved variables: `rho, rho u, rho v, E`.
pub const NVAR: usize = 4;

/// Conservative state vector `[rho, rho u, rho v, E]`.
pub type Conserved = [f64; NVAR];

/// Coordinate direction of a flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X = 0,
    Y = 1,
}

impl Axis {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(d: usize) -> Self {
        match d {
            0 => Axis::X,
            1 => Axis::Y,
            _ => panic!("axis index {d} out of range"),
        }
    }
}

/// Primitive variables plus specific total enthalpy, cached per node in the
/// volume loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub vel: [f64; 2],
    pub p: f64,
    /// `(E + p) / rho`
    pub enthalpy: f64,
}

/// Calorically perfect gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gas {
    pub gamma: f64,
    pub prandtl: f64,
}

impl Default for Gas {
    fn default() -> Self {
        Self {
            gamma: 1.4,
            prandtl: 0.72,
        }
    }
}

impl Gas {
    pub fn new(gamma: f64) -> Self {
        Self {
            gamma,
            ..Self::default()
        }
    }

    #[inline]
    pub fn pressure(&self, u: &Conserved) -> f64 {
        let ke = 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0];
        (self.gamma - 1.0) * (u[3] - ke)
    }

    /// Builds a conservative state from density, velocity and pressure.
    pub fn conserved(&self, rho: f64, vel: [f64; 2], p: f64) -> Conserved {
        let e = p / (self.gamma - 1.0) + 0.5 * rho * (vel[0] * vel[0] + vel[1] * vel[1]);
        [rho, rho * vel[0], rho * vel[1], e]
    }

    /// Checks positivity of density and pressure.
    pub fn validate(&self, u: &Conserved) -> Result<(), PhysicsError> {
        let rho = u[0];
        let pressure = if rho > 0.0 { self.pressure(u) } else { f64::NAN };
        // negated comparisons so that NaN is rejected too
        if !(rho > 0.0) || !(pressure > 0.0) {
            return Err(PhysicsError::NonPhysical { rho, pressure });
        }
        Ok(())
    }

    pub fn primitive(&self, u: &Conserved) -> Result<Primitive, PhysicsError> {
        self.validate(u)?;
        Ok(self.primitive_unchecked(u))
    }

    #[inline]
    pub(crate) fn primitive_unchecked(&self, u: &Conserved) -> Primitive {
        let rho = u[0];
        let vel = [u[1] / rho, u[2] / rho];
        let p = self.pressure(u);
        Primitive {
            rho,
            vel,
            p,
            enthalpy: (u[3] + p) / rho,
        }
    }

    #[inline]
    pub fn sound_speed(&self, prim: &Primitive) -> f64 {
        (self.gamma * prim.p / prim.rho).sqrt()
    }

    /// Physical Euler flux in direction `axis`.
    pub fn physical_flux(&self, u: &Conserved, axis: Axis) -> Result<Conserved, PhysicsError> {
        self.validate(u)?;
        Ok(self.flux_unchecked(u, axis))
    }

    #[inline]
    pub(crate) fn flux_unchecked(&self, u: &Conserved, axis: Axis) -> Conserved {
        let prim = self.primitive_unchecked(u);
        flux_from_primitive(u, &prim, axis)
    }

    /// Kinetic-energy-preserving two-point flux (Pirozzoli form):
    /// arithmetic means of density, velocity, pressure and total enthalpy.
    pub fn split_two_point_flux(
        &self,
        left: &Conserved,
        right: &Conserved,
        axis: Axis,
    ) -> Result<Conserved, PhysicsError> {
        let pl = self.primitive(left)?;
        let pr = self.primitive(right)?;
        Ok(two_point_flux(&pl, &pr, axis))
    }

    /// Local Lax–Friedrichs (Rusanov) interface flux.
    pub fn rusanov_flux(
        &self,
        left: &Conserved,
        right: &Conserved,
        axis: Axis,
    ) -> Result<Conserved, PhysicsError> {
        self.validate(left)?;
        self.validate(right)?;
        Ok(self.rusanov_unchecked(left, right, axis))
    }

    #[inline]
    pub(crate) fn rusanov_unchecked(&self, left: &Conserved, right: &Conserved, axis: Axis) -> Conserved {
        let d = axis.index();
        let pl = self.primitive_unchecked(left);
        let pr = self.primitive_unchecked(right);
        let fl = flux_from_primitive(left, &pl, axis);
        let fr = flux_from_primitive(right, &pr, axis);
        let lambda = (pl.vel[d].abs() + self.sound_speed(&pl)).max(pr.vel[d].abs() + self.sound_speed(&pr));
        let mut f = [0.0; NVAR];
        for k in 0..NVAR {
            f[k] = 0.5 * (fl[k] + fr[k]) - 0.5 * lambda * (right[k] - left[k]);
        }
        f
    }

    /// Largest `|u_d| + c` of a state along `axis`.
    pub fn max_wave_speed(&self, u: &Conserved, axis: Axis) -> f64 {
        let prim = self.primitive_unchecked(u);
        prim.vel[axis.index()].abs() + self.sound_speed(&prim)
    }
}

#[inline]
pub(crate) fn flux_from_primitive(u: &Conserved, prim: &Primitive, axis: Axis) -> Conserved {
    let d = axis.index();
    let vn = prim.vel[d];
    let mut f = [u[0] * vn, u[1] * vn, u[2] * vn, (u[3] + prim.p) * vn];
    f[1 + d] += prim.p;
    f
}

#[inline]
pub(crate) fn two_point_flux(l: &Primitive, r: &Primitive, axis: Axis) -> Conserved {
    let d = axis.index();
    let rho = 0.5 * (l.rho + r.rho);
    let u = 0.5 * (l.vel[0] + r.vel[0]);
    let v = 0.5 * (l.vel[1] + r.vel[1]);
    let p = 0.5 * (l.p + r.p);
    let h = 0.5 * (l.enthalpy + r.enthalpy);
    let vn = if d == 0 { u } else { v };
    let mass = rho * vn;
    let mut f = [mass, mass * u, mass * v, mass * h];
    f[1 + d] += p;
    f
}
