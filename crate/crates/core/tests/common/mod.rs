//! Reference solutions written independently of the library.

#![allow(dead_code)]

/// Exact solution of the Riemann problem for a gamma-law gas.
pub struct ExactRiemann {
    pub gamma: f64,
    pub left: (f64, f64, f64),
    pub right: (f64, f64, f64),
    pub p_star: f64,
    pub u_star: f64,
}

impl ExactRiemann {
    pub fn new(gamma: f64, left: (f64, f64, f64), right: (f64, f64, f64)) -> Self {
        let (rl, ul, pl) = left;
        let (rr, ur, pr) = right;
        let g = gamma;
        let f = |p: f64, rho: f64, pk: f64| -> (f64, f64) {
            let c = (g * pk / rho).sqrt();
            if p > pk {
                let a = 2.0 / ((g + 1.0) * rho);
                let b = (g - 1.0) / (g + 1.0) * pk;
                let s = (a / (p + b)).sqrt();
                ((p - pk) * s, s * (1.0 - 0.5 * (p - pk) / (p + b)))
            } else {
                let e = (g - 1.0) / (2.0 * g);
                let r = (p / pk).powf(e);
                let slope = (p / pk).powf(-(g + 1.0) / (2.0 * g)) / (rho * c);
                (2.0 * c / (g - 1.0) * (r - 1.0), slope)
            }
        };
        let mut p = 0.5 * (pl + pr);
        for _ in 0..100 {
            let (fl, dl) = f(p, rl, pl);
            let (fr, dr) = f(p, rr, pr);
            let next = p - (fl + fr + ur - ul) / (dl + dr);
            let next = next.max(1e-12);
            if (next - p).abs() < 1e-15 * p {
                p = next;
                break;
            }
            p = next;
        }
        let (fl, _) = f(p, rl, pl);
        let (fr, _) = f(p, rr, pr);
        let u_star = 0.5 * (ul + ur) + 0.5 * (fr - fl);
        Self {
            gamma,
            left,
            right,
            p_star: p,
            u_star,
        }
    }

    /// `(rho, u, p)` at similarity coordinate `s = (x - x0) / t`.
    pub fn sample(&self, s: f64) -> (f64, f64, f64) {
        let g = self.gamma;
        let (ps, us) = (self.p_star, self.u_star);
        let gm = (g - 1.0) / (g + 1.0);
        if s <= us {
            let (rl, ul, pl) = self.left;
            let cl = (g * pl / rl).sqrt();
            if ps > pl {
                let rs = rl * (ps / pl + gm) / (gm * ps / pl + 1.0);
                let speed = ul - cl * ((g + 1.0) / (2.0 * g) * ps / pl + (g - 1.0) / (2.0 * g)).sqrt();
                if s < speed { self.left } else { (rs, us, ps) }
            } else {
                let rs = rl * (ps / pl).powf(1.0 / g);
                let cs = cl * (ps / pl).powf((g - 1.0) / (2.0 * g));
                let head = ul - cl;
                let tail = us - cs;
                if s < head {
                    self.left
                } else if s > tail {
                    (rs, us, ps)
                } else {
                    let u = 2.0 / (g + 1.0) * (cl + (g - 1.0) / 2.0 * ul + s);
                    let c = 2.0 / (g + 1.0) * (cl + (g - 1.0) / 2.0 * (ul - s));
                    let rho = rl * (c / cl).powf(2.0 / (g - 1.0));
                    (rho, u, pl * (c / cl).powf(2.0 * g / (g - 1.0)))
                }
            }
        } else {
            let (rr, ur, pr) = self.right;
            let cr = (g * pr / rr).sqrt();
            if ps > pr {
                let rs = rr * (ps / pr + gm) / (gm * ps / pr + 1.0);
                let speed = ur + cr * ((g + 1.0) / (2.0 * g) * ps / pr + (g - 1.0) / (2.0 * g)).sqrt();
                if s > speed { self.right } else { (rs, us, ps) }
            } else {
                let rs = rr * (ps / pr).powf(1.0 / g);
                let cs = cr * (ps / pr).powf((g - 1.0) / (2.0 * g));
                let head = ur + cr;
                let tail = us + cs;
                if s > head {
                    self.right
                } else if s < tail {
                    (rs, us, ps)
                } else {
                    let u = 2.0 / (g + 1.0) * (-cr + (g - 1.0) / 2.0 * ur + s);
                    let c = 2.0 / (g + 1.0) * (cr - (g - 1.0) / 2.0 * (ur - s));
                    let rho = rr * (c / cr).powf(2.0 / (g - 1.0));
                    (rho, u, pr * (c / cr).powf(2.0 * g / (g - 1.0)))
                }
            }
        }
    }

    /// Position of the right-running shock at time `t` for a jump at `x0`.
    pub fn shock_position(&self, x0: f64, t: f64) -> f64 {
        let g = self.gamma;
        let (rr, ur, pr) = self.right;
        let cr = (g * pr / rr).sqrt();
        let speed = ur + cr * ((g + 1.0) / (2.0 * g) * self.p_star / pr + (g - 1.0) / (2.0 * g)).sqrt();
        x0 + speed * t
    }
}

/// Density of the isentropic vortex (strength `beta`, unit background,
/// advected with `vel` from the origin) on the periodic box `[-5, 5]^2`.
pub fn vortex_density(gamma: f64, beta: f64, vel: [f64; 2], x: [f64; 2], t: f64) -> f64 {
    let wrap = |d: f64| d - 10.0 * (d / 10.0).round();
    let dx = wrap(x[0] - vel[0] * t);
    let dy = wrap(x[1] - vel[1] * t);
    let r2 = dx * dx + dy * dy;
    let pi = std::f64::consts::PI;
    let temp = 1.0 - (gamma - 1.0) * beta * beta / (8.0 * gamma * pi * pi) * (1.0 - r2).exp();
    temp.powf(1.0 / (gamma - 1.0))
}

/// Spalding's law evaluated term by term.
pub fn spalding(u: f64) -> f64 {
    let k = 0.4 * u;
    u + 0.1108 * (k.exp() - 1.0 - k - k * k / 2.0 - k.powi(3) / 6.0 - k.powi(4) / 24.0)
}

/// Inverse of [`spalding`] by plain bisection.
pub fn spalding_inverse(y: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, y.max(1.0));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spalding(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
