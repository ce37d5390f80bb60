//! Exact complex 3-vector algebra for the time-harmonic Maxwell machinery:
//! plane-wave solution families, the Kerr amplitude set and its orthogonality
//! relations, the second-harmonic anchor families, quadrature evaluation of
//! the integral identities on analytic fields, the amplitude-product lower
//! bound, and pointwise recovery of the susceptibility direction.
//!
//! All dot and cross products are bilinear (no conjugation); conjugation is
//! always written explicitly. A plane wave is `amp · e^{-(i/h) x·ξ}` with
//! `ξ·ξ = (ω √(μ₀ε₀) h)²`; both Maxwell curl equations then reduce to exact
//! amplitude identities, which is what `maxwell_residual` checks.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::band::dense_solve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CVec3(pub [Complex64; 3]);

impl CVec3 {
    pub fn zero() -> CVec3 {
        CVec3([Complex64::new(0.0, 0.0); 3])
    }

    pub fn real(x: f64, y: f64, z: f64) -> CVec3 {
        CVec3([
            Complex64::new(x, 0.0),
            Complex64::new(y, 0.0),
            Complex64::new(z, 0.0),
        ])
    }

    /// Bilinear dot `a·b = Σ a_l b_l`.
    pub fn dot(&self, other: &CVec3) -> Complex64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn cross(&self, other: &CVec3) -> CVec3 {
        let a = &self.0;
        let b = &other.0;
        CVec3([
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    }

    pub fn conj(&self) -> CVec3 {
        CVec3([self.0[0].conj(), self.0[1].conj(), self.0[2].conj()])
    }

    pub fn scale(&self, c: Complex64) -> CVec3 {
        CVec3([self.0[0] * c, self.0[1] * c, self.0[2] * c])
    }

    pub fn add(&self, other: &CVec3) -> CVec3 {
        CVec3([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }

    pub fn sub(&self, other: &CVec3) -> CVec3 {
        CVec3([
            self.0[0] - other.0[0],
            self.0[1] - other.0[1],
            self.0[2] - other.0[2],
        ])
    }

    pub fn neg(&self) -> CVec3 {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    /// Hermitian (Frobenius) norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn imag(&self) -> [f64; 3] {
        [self.0[0].im, self.0[1].im, self.0[2].im]
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Medium {
    pub epsilon0: f64,
    pub mu0: f64,
    pub omega: f64,
}

impl Medium {
    pub fn unit(omega: f64) -> Medium {
        Medium {
            epsilon0: 1.0,
            mu0: 1.0,
            omega,
        }
    }

    /// `k = ω √(μ₀ ε₀)`.
    pub fn wavenumber(&self) -> f64 {
        self.omega * (self.mu0 * self.epsilon0).sqrt()
    }
}

fn on_variety(xi: &CVec3, kh: f64) -> Result<()> {
    let res = (xi.dot(xi) - kh * kh).norm();
    if res > 1e-12 * xi.norm_sqr().max(1.0) {
        return Err(Error::OffVariety(res));
    }
    Ok(())
}

/// One plane-wave solution: fields `E = e_amp e^{-(i/h) x·xi}` and likewise
/// for `H`, valid at (possibly frequency-doubled) `omega`.
#[derive(Debug, Clone)]
pub struct EMPlaneWave {
    pub xi: CVec3,
    pub h: f64,
    pub omega: f64,
    pub e_amp: CVec3,
    pub h_amp: CVec3,
}

impl EMPlaneWave {
    fn phase_at(&self, x: [f64; 3]) -> Complex64 {
        let xv = CVec3::real(x[0], x[1], x[2]);
        (-Complex64::new(0.0, 1.0) * xv.dot(&self.xi) / self.h).exp()
    }

    pub fn e_at(&self, x: [f64; 3]) -> CVec3 {
        self.e_amp.scale(self.phase_at(x))
    }

    pub fn h_at(&self, x: [f64; 3]) -> CVec3 {
        self.h_amp.scale(self.phase_at(x))
    }

    /// Closed-form residual of both curl equations for the exponential
    /// ansatz: `∇∧E - iωμ₀H` reduces to `(-i/h) ξ×e_amp - iωμ₀ h_amp` and
    /// `∇∧H + iωε₀E` to `(-i/h) ξ×h_amp + iωε₀ e_amp`.
    pub fn maxwell_residual(&self, medium: &Medium) -> f64 {
        let mi = Complex64::new(0.0, -1.0) / self.h;
        let i_omega = Complex64::new(0.0, self.omega);
        let r1 = self
            .xi
            .cross(&self.e_amp)
            .scale(mi)
            .sub(&self.h_amp.scale(i_omega * medium.mu0));
        let r2 = self
            .xi
            .cross(&self.h_amp)
            .scale(mi)
            .add(&self.e_amp.scale(i_omega * medium.epsilon0));
        r1.norm().max(r2.norm())
    }
}

/// The general two-parameter plane wave: for `ξ·ξ = (kh)²`,
/// `E = ε₀^{-1/2} e^{-(i/h)x·ξ} ((1/h²)(ξ·a)ξ - (k/h) ξ×b - k²a)` and
/// `H = μ₀^{-1/2} e^{-(i/h)x·ξ} ((1/h²)(ξ·b)ξ + (k/h) ξ×a - k²b)`.
pub fn em_plane_wave(xi: CVec3, a: CVec3, b: CVec3, h: f64, medium: &Medium) -> Result<EMPlaneWave> {
    let k = medium.wavenumber();
    on_variety(&xi, k * h)?;
    let inv_h2 = Complex64::new(1.0 / (h * h), 0.0);
    let k_over_h = Complex64::new(k / h, 0.0);
    let k2 = Complex64::new(k * k, 0.0);
    let e_amp = xi
        .scale(inv_h2 * xi.dot(&a))
        .sub(&xi.cross(&b).scale(k_over_h))
        .sub(&a.scale(k2))
        .scale(Complex64::new(medium.epsilon0.powf(-0.5), 0.0));
    let h_amp = xi
        .scale(inv_h2 * xi.dot(&b))
        .add(&xi.cross(&a).scale(k_over_h))
        .sub(&b.scale(k2))
        .scale(Complex64::new(medium.mu0.powf(-0.5), 0.0));
    Ok(EMPlaneWave {
        xi,
        h,
        omega: medium.omega,
        e_amp,
        h_amp,
    })
}

/// The four-wave Kerr probe family: three waves at `ξ` with amplitudes
/// `a₁ = (1,0,1)`, `a₂ = a₃ = ξ̄ × ā₁`, and the compensating wave at `η`
/// with `a₀ = ξ × a₁`, phase `e^{+(i/h) x·η̄}`.
#[derive(Debug, Clone)]
pub struct KerrFamily {
    /// Waves 1, 2, 3, 0 in that order.
    pub waves: [EMPlaneWave; 4],
    pub amplitudes: [CVec3; 4],
}

pub fn kerr_family(xi: CVec3, eta: CVec3, h: f64, medium: &Medium) -> Result<KerrFamily> {
    let k = medium.wavenumber();
    on_variety(&xi, k * h)?;
    on_variety(&eta, k * h)?;
    let a1 = CVec3::real(1.0, 0.0, 1.0);
    let a2 = xi.conj().cross(&a1.conj());
    let a3 = a2;
    let a0 = xi.cross(&a1);
    let zero = CVec3::zero();
    let w1 = em_plane_wave(xi, a1, zero, h, medium)?;
    let w2 = em_plane_wave(xi, a2, zero, h, medium)?;
    let w3 = em_plane_wave(xi, a3, zero, h, medium)?;

    // compensating wave: E₀ = ε₀^{-1/2}((1/h²)(η̄·ā₀)η̄ - k²ā₀) e^{+(i/h)x·η̄},
    // H₀ = -μ₀^{-1/2}(k/h)(η̄×ā₀) e^{+(i/h)x·η̄}; phase vector -η̄ keeps the
    // common e^{-(i/h)x·ξ} representation
    let eta_bar = eta.conj();
    let a0_bar = a0.conj();
    let inv_h2 = Complex64::new(1.0 / (h * h), 0.0);
    let e0 = eta_bar
        .scale(inv_h2 * eta_bar.dot(&a0_bar))
        .sub(&a0_bar.scale(Complex64::new(k * k, 0.0)))
        .scale(Complex64::new(medium.epsilon0.powf(-0.5), 0.0));
    let h0 = eta_bar
        .cross(&a0_bar)
        .scale(Complex64::new(-k / h * medium.mu0.powf(-0.5), 0.0));
    let w0 = EMPlaneWave {
        xi: eta_bar.neg(),
        h,
        omega: medium.omega,
        e_amp: e0,
        h_amp: h0,
    };
    Ok(KerrFamily {
        waves: [w1, w2, w3, w0],
        amplitudes: [a1, a2, a3, a0],
    })
}

/// Uniform lattice on the unit cube with trapezoid weights.
#[derive(Debug, Clone, Copy)]
pub struct BoxGrid3 {
    pub n: usize,
}

impl BoxGrid3 {
    pub fn new(n: usize) -> Result<BoxGrid3> {
        if n < 2 {
            return Err(Error::Invalid(format!("box grid needs n >= 2, got {n}")));
        }
        Ok(BoxGrid3 { n })
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        let i = idx % n;
        let j = (idx / n) % n;
        let k = idx / (n * n);
        let h = 1.0 / (n - 1) as f64;
        [i as f64 * h, j as f64 * h, k as f64 * h]
    }

    pub fn weight(&self, idx: usize) -> f64 {
        let n = self.n;
        let h = 1.0 / (n - 1) as f64;
        let edge = |i: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let i = idx % n;
        let j = (idx / n) % n;
        let k = idx / (n * n);
        h * h * h * edge(i) * edge(j) * edge(k)
    }
}

/// Nodal Kerr coefficients on a box grid.
#[derive(Debug, Clone)]
pub struct MaxwellCoefficients {
    pub grid: BoxGrid3,
    pub p: Vec<Complex64>,
    pub q: Vec<Complex64>,
    pub chi2: Vec<CVec3>,
}

impl MaxwellCoefficients {
    pub fn from_fns(
        grid: BoxGrid3,
        p: impl Fn([f64; 3]) -> Complex64,
        q: impl Fn([f64; 3]) -> Complex64,
        chi2: impl Fn([f64; 3]) -> CVec3,
    ) -> MaxwellCoefficients {
        let nodes = grid.node_count();
        MaxwellCoefficients {
            grid,
            p: (0..nodes).map(|k| p(grid.coords(k))).collect(),
            q: (0..nodes).map(|k| q(grid.coords(k))).collect(),
            chi2: (0..nodes).map(|k| chi2(grid.coords(k))).collect(),
        }
    }

    pub fn constant(grid: BoxGrid3, p: Complex64, q: Complex64, chi2: CVec3) -> MaxwellCoefficients {
        MaxwellCoefficients::from_fns(grid, |_| p, |_| q, |_| chi2)
    }
}

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Trapezoid quadrature of the Kerr integral identity on analytic fields:
/// `∫ (p₁-p₂) Σ_σ (W^{σ1}·W̄^{σ2})(W^{σ3}·W̄^{0}) +
///    (q₁-q₂) Σ_σ (V^{σ1}·V̄^{σ2})(V^{σ3}·V̄^{0}) dV`.
pub fn kerr_identity_quadrature(
    coeffs1: &MaxwellCoefficients,
    coeffs2: &MaxwellCoefficients,
    family: &KerrFamily,
    grid: &BoxGrid3,
) -> Result<Complex64> {
    if coeffs1.grid.n != grid.n || coeffs2.grid.n != grid.n {
        return Err(Error::Invalid("coefficient grids do not match the quadrature grid".into()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for idx in 0..grid.node_count() {
        let x = grid.coords(idx);
        let w = grid.weight(idx);
        let e: Vec<CVec3> = family.waves.iter().map(|wv| wv.e_at(x)).collect();
        let hm: Vec<CVec3> = family.waves.iter().map(|wv| wv.h_at(x)).collect();
        let mut w_sum = Complex64::new(0.0, 0.0);
        let mut v_sum = Complex64::new(0.0, 0.0);
        for perm in PERMS {
            w_sum += hm[perm[0]].dot(&hm[perm[1]].conj()) * hm[perm[2]].dot(&hm[3].conj());
            v_sum += e[perm[0]].dot(&e[perm[1]].conj()) * e[perm[2]].dot(&e[3].conj());
        }
        let dp = coeffs1.p[idx] - coeffs2.p[idx];
        let dq = coeffs1.q[idx] - coeffs2.q[idx];
        acc += w * (dp * w_sum + dq * v_sum);
    }
    Ok(acc)
}

/// Modulus of the x-independent amplitude part
/// `h⁸ e^{(i/h)x·(2ξ-ξ̄+η)} (E₁·Ē₂)(E₃·Ē₀)`, evaluated in the unit medium.
/// At the anchors it tends to 4·8 = 32 as h → 0.
pub fn amplitude_product_bound(xi: CVec3, eta: CVec3, h: f64, epsilon_ball: f64) -> Result<f64> {
    let xx = xi.dot(&xi);
    if xx.im.abs() > 1e-10 * xi.norm_sqr().max(1.0) || xx.re <= 0.0 {
        return Err(Error::OffVariety(xx.im.abs()));
    }
    let kh = xx.re.sqrt();
    let k = kh / h;
    on_variety(&eta, kh)?;
    let anchor_xi = kerr_anchor_xi(kh);
    let anchor_eta = kerr_anchor_eta(kh);
    if xi.sub(&anchor_xi).norm() > epsilon_ball + 1e-12
        || eta.sub(&anchor_eta).norm() > epsilon_ball + 1e-12
    {
        return Err(Error::Invalid(
            "xi/eta outside the requested ball around the anchors".into(),
        ));
    }
    let family = kerr_family(xi, eta, h, &Medium::unit(k))?;
    let h8 = h.powi(8);
    let e1 = &family.waves[0].e_amp;
    let e2 = &family.waves[1].e_amp;
    let e3 = &family.waves[2].e_amp;
    let e0 = &family.waves[3].e_amp;
    let value = e1.dot(&e2.conj()) * e3.dot(&e0.conj());
    Ok((value * h8).norm())
}

/// Deterministic on-variety constructor from raw parameters: takes an
/// arbitrary imaginary part and a direction, projects the direction
/// orthogonal to the imaginary part, and scales it to the length forced by
/// `|Re ξ|² - |Im ξ|² = (kh)²`, `Re ξ · Im ξ = 0`. Returns `None` when the
/// direction is (nearly) parallel to the imaginary part.
pub fn on_variety_vector(kh: f64, im: [f64; 3], dir: [f64; 3]) -> Option<CVec3> {
    let im_n2: f64 = im.iter().map(|v| v * v).sum();
    let d_dot_im: f64 = dir.iter().zip(&im).map(|(a, b)| a * b).sum();
    let mut re = [0.0; 3];
    for l in 0..3 {
        re[l] = dir[l] - if im_n2 > 0.0 { d_dot_im * im[l] / im_n2 } else { 0.0 };
    }
    let re_n: f64 = re.iter().map(|v| v * v).sum::<f64>().sqrt();
    if re_n < 1e-6 {
        return None;
    }
    let want = (kh * kh + im_n2).sqrt();
    for v in re.iter_mut() {
        *v *= want / re_n;
    }
    Some(CVec3([
        Complex64::new(re[0], im[0]),
        Complex64::new(re[1], im[1]),
        Complex64::new(re[2], im[2]),
    ]))
}

/// Kerr anchor `ξ₀ = (i, √(k²h²+1), 0)`.
pub fn kerr_anchor_xi(kh: f64) -> CVec3 {
    CVec3([
        Complex64::new(0.0, 1.0),
        Complex64::new((kh * kh + 1.0).sqrt(), 0.0),
        Complex64::new(0.0, 0.0),
    ])
}

/// Kerr anchor `η₀ = (i, -√(k²h²+1), 0)`.
pub fn kerr_anchor_eta(kh: f64) -> CVec3 {
    CVec3([
        Complex64::new(0.0, 1.0),
        Complex64::new(-(kh * kh + 1.0).sqrt(), 0.0),
        Complex64::new(0.0, 0.0),
    ])
}

/// One SHG probe configuration: the ω-frequency anchor pair, the 2ω
/// frequency `ς` with its divergence-free amplitude, and the three analytic
/// fields entering the `2ω`-channel identity.
#[derive(Debug, Clone)]
pub struct ShgFamily {
    pub case: usize,
    pub xi0: CVec3,
    pub eta0: CVec3,
    pub varsigma: CVec3,
    pub a_varsigma: CVec3,
    /// `E₁^ω`, `E₂^ω`, `E₀^{2ω}`.
    pub waves: [EMPlaneWave; 3],
}

/// Anchor family for SHG case 1, 2 or 3 at wavenumber `k` and scale `h`
/// (requires `kh < 1`).
pub fn shg_family(case: usize, k: f64, h: f64) -> Result<ShgFamily> {
    let kh = k * h;
    if kh >= 1.0 {
        return Err(Error::ShgDegenerate(kh));
    }
    if !(1..=3).contains(&case) {
        return Err(Error::Invalid(format!("SHG case must be 1, 2 or 3, got {case}")));
    }
    let s = (1.0 + kh * kh).sqrt();
    let r = (2.0 * (1.0 - kh * kh)).sqrt();
    let amp = (1.0 - kh * kh) / s;
    let i = Complex64::new(0.0, 1.0);
    // case signs: (second component of ξ₀, third of η₀) and the matching ς
    let (s2, s3) = match case {
        1 => (1.0, 1.0),
        2 => (-1.0, -1.0),
        _ => (1.0, -1.0),
    };
    let xi0 = CVec3([i, Complex64::new(s2 * s, 0.0), Complex64::new(0.0, 0.0)]);
    let eta0 = CVec3([i, Complex64::new(0.0, 0.0), Complex64::new(s3 * s, 0.0)]);
    let varsigma = CVec3([
        i * r,
        Complex64::new(s2 * s, 0.0),
        Complex64::new(s3 * s, 0.0),
    ]);
    let a_varsigma = CVec3([
        -i * r,
        Complex64::new(-s2 * amp, 0.0),
        Complex64::new(-s3 * amp, 0.0),
    ]);

    let sigma_res = (varsigma.dot(&varsigma) - 4.0 * kh * kh).norm();
    let ortho_res = varsigma.dot(&a_varsigma).norm();
    if sigma_res > 1e-12 * varsigma.norm_sqr().max(1.0) || ortho_res > 1e-12 {
        return Err(Error::OffVariety(sigma_res.max(ortho_res)));
    }

    let medium = Medium::unit(k);
    let a = CVec3::real(1.0, 0.0, 0.0);
    let zero = CVec3::zero();
    let e1 = em_plane_wave(xi0, a, zero, h, &medium)?;
    let e2 = em_plane_wave(eta0, a, zero, h, &medium)?;
    // 2ω wave per the divergence-free ansatz: E = ε₀^{-1/2} Ã_ς e^{-(i/h)x·ς},
    // H = μ₀^{-1/2} (-(1/(2kh)) ς×Ã_ς) e^{-(i/h)x·ς}
    let e0 = EMPlaneWave {
        xi: varsigma,
        h,
        omega: 2.0 * k,
        e_amp: a_varsigma,
        h_amp: varsigma
            .cross(&a_varsigma)
            .scale(Complex64::new(-1.0 / (2.0 * kh), 0.0)),
    };
    Ok(ShgFamily {
        case,
        xi0,
        eta0,
        varsigma,
        a_varsigma,
        waves: [e1, e2, e0],
    })
}

/// Trapezoid quadrature of the 2ω-channel SHG identity on analytic fields:
/// `∫ (χ¹-χ²)·V̄₀^{2ω} (V₁^ω·V₂^ω) dV`.
pub fn shg_identity_quadrature(
    chi1: &MaxwellCoefficients,
    chi2: &MaxwellCoefficients,
    family: &ShgFamily,
    grid: &BoxGrid3,
) -> Result<Complex64> {
    if chi1.grid.n != grid.n || chi2.grid.n != grid.n {
        return Err(Error::Invalid("coefficient grids do not match the quadrature grid".into()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for idx in 0..grid.node_count() {
        let x = grid.coords(idx);
        let w = grid.weight(idx);
        let dchi = chi1.chi2[idx].sub(&chi2.chi2[idx]);
        let e0 = family.waves[2].e_at(x);
        let e1 = family.waves[0].e_at(x);
        let e2 = family.waves[1].e_at(x);
        acc += w * dchi.dot(&e0.conj()) * e1.dot(&e2);
    }
    Ok(acc)
}

/// Direction rows of the three SHG cases (the h → 0 limits of `conj(Ã_ς)`).
pub fn recovery_matrix() -> [[Complex64; 3]; 3] {
    let r2i = Complex64::new(0.0, 2.0_f64.sqrt());
    let one = Complex64::new(1.0, 0.0);
    [
        [r2i, -one, -one],
        [r2i, one, one],
        [r2i, -one, one],
    ]
}

/// Solve the 3×3 direction system for the pointwise susceptibility
/// difference from the three case moments.
pub fn recover_chi_direction(m1: Complex64, m2: Complex64, m3: Complex64) -> CVec3 {
    let m = recovery_matrix();
    let a: Vec<Vec<Complex64>> = m.iter().map(|r| r.to_vec()).collect();
    let x = dense_solve(&a, &[m1, m2, m3]).expect("fixed matrix has determinant 4*sqrt(2)i");
    CVec3([x[0], x[1], x[2]])
}
