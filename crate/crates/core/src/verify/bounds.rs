use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use super::grassmann::random_element;
use super::{pairs, Check, Suite};
use crate::grassmann::{
    kernel_from_gr, n_functional, omega, s_empirical, shift_convolve, unit_rho, wick_order, CovarianceMatrix,
    ExactElement, GeneratorSet,
};
use crate::kernel::{Block, Kernel, SeminormOptions};
use crate::lattice::Lattice;
use crate::norm::{NormElement, SaturatedSet};
use crate::propagator::PropagatorSpec;
use crate::sample;
use crate::{Error, Result};

pub const INTEGRAL_DRAWS: usize = 4;
pub const CONTRACTION_DRAWS: usize = 24;
pub const RG_DRAWS: usize = 20;
pub const FAMILY_DRAWS: usize = 5;
pub const ALPHA: f64 = 2.0;
pub const FD_STEP: f64 = 1e-4;
pub const SLACK: f64 = 1e-12;

/// Antisymmetric two-point kernel with random entries on the listed points.
fn random_covariance(rng: &mut impl Rng, lat: &Arc<Lattice>, points: &[usize], scale: f64) -> Kernel {
    let mut c = Kernel::new(lat.clone(), 0, 2).expect("two slots");
    for (i, &p) in points.iter().enumerate() {
        for &q in &points[i + 1..] {
            let v = sample::complex(rng) * scale;
            c.set(&[p, q], v).expect("inside lattice");
            c.set(&[q, p], -v).expect("inside lattice");
        }
    }
    c
}

fn restrict(c: &Kernel, points: &[usize]) -> Kernel {
    let mut out = Kernel::new(c.lattice().clone(), 0, 2).expect("two slots");
    for &p in points {
        for &q in points {
            let v = c.get(&[p, q]);
            if v != Complex64::default() {
                out.set(&[p, q], v).expect("inside lattice");
            }
        }
    }
    out
}

/// `max{‖C‖_{1,∞}, |||C|||_∞}`.
pub fn contraction_constant(c: &Kernel, dom: &Arc<SaturatedSet>) -> Result<NormElement> {
    c.seminorm_1inf(dom, SeminormOptions::default()).max(&c.norm_sup(dom))
}

/// Exact `S(C)` over the listed points (exhaustive Pfaffian moments).
pub fn s_exact(c: &Kernel, points: &[usize]) -> Result<f64> {
    let cov = CovarianceMatrix::from_kernel(c, points)?;
    let est = s_empirical(&cov, points.len() - points.len() % 2, 0, 0)?;
    if !est.exhaustive {
        return Err(Error::Capacity("exact S needs an exhaustive moment scan".into()));
    }
    Ok(est.value)
}

/// `f'(η; ξ_{n'+1}..) = ∫ dξ_1..dξ_{n'} f(η; ξ) ∫ψ(ξ_1)..ψ(ξ_{n'}) dμ_C`.
pub fn partial_integral(f: &Kernel, c: &Kernel, n_int: usize) -> Result<Kernel> {
    let (m, n) = (f.m(), f.n());
    if n_int == 0 || n_int > n {
        return Err(Error::usage("partial integration needs 1 <= n' <= n"));
    }
    let lat = f.lattice().clone();
    let mut out = Kernel::new(lat.clone(), m, n - n_int)?;
    if n_int % 2 == 1 {
        return Ok(out);
    }
    let w = lat.cell_volume().powi(n_int as i32);
    for (key, v) in f.entries() {
        let p = crate::kernel::unpack(key, m + n);
        let xs = &p[m..m + n_int];
        let moment = CovarianceMatrix::from_upper(n_int, |a, b| c.get(&[xs[a], xs[b]])).pfaffian()?;
        if moment == Complex64::default() {
            continue;
        }
        let rest: Vec<usize> = p[..m].iter().chain(&p[m + n_int..m + n]).copied().collect();
        out.add_at(&rest, v * moment * w)?;
    }
    Ok(out)
}

pub fn integral_bound_suite(seed: u64) -> Suite {
    let mut suite = Suite::new("integral-bound");
    let lat = Arc::new(Lattice::new(1, 2, 1, 1.0, 0.5).expect("valid lattice"));
    let points: Vec<usize> = (0..lat.npts()).collect();
    let dom = Arc::new(SaturatedSet::boxed(1, 1, 1));
    let opts = SeminormOptions::default();
    let mut check = Check::new("partial_integral_bound", SLACK);
    let mut rng = sample::rng(seed, 0x35);
    for _ in 0..INTEGRAL_DRAWS {
        let c = random_covariance(&mut rng, &lat, &points, 1.0);
        let b = match s_exact(&c, &points) {
            Ok(s) => 2.0 * s,
            Err(e) => {
                check.fail(e.to_string());
                continue;
            }
        };
        for n in 1..=6 {
            for n_int in 1..=n.min(4) {
                for m in 0..=1 {
                    let f = sample::sparse_kernel(&mut rng, &lat, m, n, 40, 2);
                    let run = || -> Result<Vec<(f64, f64)>> {
                        let fp = partial_integral(&f, &c, n_int)?;
                        let rhs = f.seminorm_1inf(&dom, opts).scale((b / 2.0).powi(n_int as i32));
                        Ok(pairs(&fp.seminorm_1inf(&dom, opts), &rhs))
                    };
                    match run() {
                        Ok(p) => check.bound(&p),
                        Err(e) => check.fail(e.to_string()),
                    }
                }
            }
        }
    }
    suite.push(check);
    suite
}

pub fn contraction_bound_suite(seed: u64) -> Suite {
    let mut suite = Suite::new("contraction-bound");
    let lat = Arc::new(Lattice::new(1, 4, 4, 1.0, 0.5).expect("valid lattice"));
    let dom = Arc::new(SaturatedSet::boxed(1, 1, 1));
    let opts = SeminormOptions::default();
    let mut check = Check::new("contraction_bound", SLACK);
    let c = match PropagatorSpec::filled_band().c_position(&lat) {
        Ok(c) => c,
        Err(e) => {
            check.fail(e.to_string());
            suite.push(check);
            return suite;
        }
    };
    let frak = match contraction_constant(&c, &dom) {
        Ok(x) => x,
        Err(e) => {
            check.fail(e.to_string());
            suite.push(check);
            return suite;
        }
    };
    let mut rng = sample::rng(seed, 0x36);
    for k in 0..CONTRACTION_DRAWS {
        let (m, mp) = [(0, 0), (1, 0), (0, 1), (1, 1)][k % 4];
        let n = rng.gen_range(1..=3);
        let np = rng.gen_range(1..=3);
        let f = sample::sparse_kernel(&mut rng, &lat, m, n, 12, 2);
        let fp = sample::sparse_kernel(&mut rng, &lat, mp, np, 12, 2);
        let run = || -> Result<Vec<(f64, f64)>> {
            let ant = f.tensor(&fp)?.antisymmetrize(Block::External);
            let rhs = frak.mul(&f.seminorm_1inf(&dom, opts))?.mul(&fp.seminorm_1inf(&dom, opts))?;
            let mut all = Vec::new();
            for i in 0..n {
                for j in 0..np {
                    let h = ant.contract(&c, i, n + j)?;
                    all.extend(pairs(&h.seminorm_1inf(&dom, opts), &rhs));
                }
            }
            Ok(all)
        };
        match run() {
            Ok(p) => check.bound(&p),
            Err(e) => check.fail(e.to_string()),
        }
    }
    suite.push(check);
    suite
}

/// Base space of the renormalization group checks: 16 points, six of them
/// internal generators and two external.
struct RgSetup {
    lat: Arc<Lattice>,
    gens: GeneratorSet,
    internal: Vec<usize>,
    dom: Arc<SaturatedSet>,
    c0: Kernel,
}

fn rg_setup() -> Result<RgSetup> {
    let lat = Arc::new(Lattice::new(1, 2, 2, 1.0, 0.5)?);
    let mut internal: Vec<usize> = (0..4).map(|s| lat.with_spin_conj(0, s / 2, s % 2)).collect();
    internal.push(lat.with_spin_conj(1, 0, 0));
    internal.push(lat.with_spin_conj(1, 0, 1));
    let external = vec![lat.with_spin_conj(2, 0, 0), lat.with_spin_conj(3, 0, 1)];
    let gens = GeneratorSet::new(lat.clone(), external, internal.clone())?;
    let c0 = restrict(&PropagatorSpec::filled_band().c_position(&lat)?, &internal);
    Ok(RgSetup { lat, gens, internal, dom: Arc::new(SaturatedSet::boxed(1, 1, 1)), c0 })
}

impl RgSetup {
    fn n(&self, w: &ExactElement, frak: &NormElement, b: f64, alpha: f64) -> Result<NormElement> {
        n_functional(w, &self.gens, frak, b, alpha, &self.dom, &unit_rho, SeminormOptions::default())
    }

    /// Every bidegree of `w` fits the kernel slots.
    fn representable(&self, w: &ExactElement) -> Result<()> {
        for (m, n) in w.bidegrees() {
            kernel_from_gr(w, &self.gens, m as usize, n as usize)?;
        }
        Ok(())
    }
}

/// `N(W; 𝔠, b, α)` scaled to `target` at the origin.
fn scaled_to(s: &RgSetup, w: ExactElement, frak: &NormElement, b: f64, alpha: f64, target: f64) -> Result<ExactElement> {
    let n0 = s.n(&w, frak, b, alpha)?.constant_term();
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::Numeric("random element has degenerate N".into()));
    }
    Ok(w.scale(Complex64::new(target / n0, 0.0)))
}

/// `x² / (1 - a x)` in the norm domain.
fn ratio_square(x: &NormElement, a: f64, power: u32) -> Result<NormElement> {
    x.powi(power).mul(&x.scale(a).geom_inverse(1.0)?)
}

fn quadratic_case(s: &RgSetup, rng: &mut impl Rng, frak: &NormElement, b: f64, cov: &CovarianceMatrix) -> Result<Vec<(f64, f64)>> {
    let a = ALPHA;
    let target = rng.gen_range(0.05..0.95) * a * a / 4.0;
    let w = random_element(rng, s.gens.n_gen(), s.gens.n_ext(), true, 1.0);
    let w = scaled_to(s, w, frak, b, 8.0 * a, target)?;
    let image = omega(&wick_order(&w, cov)?, cov)?;
    let diff = image.sub(&w)?;
    s.representable(&diff)?;
    let lhs = s.n(&diff, frak, b, a)?;
    let n8 = s.n(&w, frak, b, 8.0 * a)?;
    let rhs = ratio_square(&n8, 4.0 / (a * a), 2)?.scale(2.0 / (a * a));
    Ok(pairs(&lhs, &rhs))
}

/// Largest `μ` with `𝔠 ≤ 𝔠²/μ` coefficientwise.
pub fn admissible_mu(frak: &NormElement) -> Result<f64> {
    let sq = frak.mul(frak)?;
    let mut mu = f64::INFINITY;
    for (&c, &c2) in frak.coeffs().iter().zip(sq.coeffs()) {
        if c > 0.0 && c.is_finite() {
            mu = mu.min(c2 / c);
        }
    }
    Ok(mu)
}

fn derivative_case(s: &RgSetup, rng: &mut impl Rng) -> Result<Vec<(f64, f64)>> {
    let a = ALPHA;
    let lat = &s.lat;
    let scale = s.c0.max_abs();
    let c1 = random_covariance(rng, lat, &s.internal, 0.3 * scale);
    let d0 = random_covariance(rng, lat, &s.internal, 0.5 * scale);
    let d1 = random_covariance(rng, lat, &s.internal, 0.3 * scale);
    let frak = contraction_constant(&s.c0, &s.dom)?;
    let frak_d = contraction_constant(&c1, &s.dom)?;
    let mu = admissible_mu(&frak)?;
    let b = 4.0 * s_exact(&s.c0, &s.internal)?.max(s_exact(&d0, &s.internal)?);
    let bp = 4.0 * s_exact(&d1, &s.internal)?;

    let target = rng.gen_range(0.05..0.9) * a * a;
    let raw0 = random_element(rng, s.gens.n_gen(), s.gens.n_ext(), true, 1.0);
    let w0 = scaled_to(s, raw0, &frak, b, 32.0 * a, target)?;
    let raw1 = random_element(rng, s.gens.n_gen(), s.gens.n_ext(), true, 1.0);
    let w1 = scaled_to(s, raw1, &frak, b, 8.0 * a, 1.0)?;

    let at = |kappa: f64| -> Result<ExactElement> {
        let k = Complex64::new(kappa, 0.0);
        let c = s.gens.covariance(&s.c0.add(&c1.scale(k))?)?;
        let d = s.gens.covariance(&d0.add(&d1.scale(k))?)?;
        let w = w0.add(&w1.scale(k))?;
        let tilde = shift_convolve(&omega(&wick_order(&w, &c.add(&d)?)?, &c)?, &d)?;
        tilde.sub(&w)
    };
    let h = FD_STEP;
    let deriv = at(h)?.sub(&at(-h)?)?.scale(Complex64::new(0.5 / h, 0.0));
    s.representable(&deriv)?;
    let lhs = s.n(&deriv, &frak, b, a)?;

    let n32 = s.n(&w0, &frak, b, 32.0 * a)?;
    let inv = 1.0 / (a * a);
    let first = ratio_square(&n32, inv, 1)?.mul(&s.n(&w1, &frak, b, 8.0 * a)?)?;
    let bracket = frak_d.scale(1.0 / (4.0 * mu)).add(&NormElement::constant(s.dom.clone(), (bp / b).powi(2)))?;
    let second = ratio_square(&n32, inv, 2)?.mul(&bracket)?;
    let rhs = first.add(&second)?.scale(0.5 * inv);
    Ok(pairs(&lhs, &rhs))
}

pub fn rg_map_suite(seed: u64) -> Suite {
    let mut suite = Suite::new("rg-map");
    let mut quadratic = Check::new("rg_map_quadratic_bound", SLACK);
    let mut derivative = Check::new("rg_map_covariance_derivative", SLACK);
    let s = match rg_setup() {
        Ok(s) => s,
        Err(e) => {
            quadratic.fail(e.to_string());
            derivative.fail(e.to_string());
            suite.push(quadratic);
            suite.push(derivative);
            return suite;
        }
    };
    let prep = || -> Result<(NormElement, f64, CovarianceMatrix)> {
        let frak = contraction_constant(&s.c0, &s.dom)?;
        let b = 2.0 * s_exact(&s.c0, &s.internal)?;
        Ok((frak, b, s.gens.covariance(&s.c0)?))
    };
    match prep() {
        Ok((frak, b, cov)) => {
            let mut rng = sample::rng(seed, 0x3a);
            for _ in 0..RG_DRAWS {
                match quadratic_case(&s, &mut rng, &frak, b, &cov) {
                    Ok(p) => quadratic.bound(&p),
                    Err(e) => quadratic.fail(e.to_string()),
                }
            }
        }
        Err(e) => quadratic.fail(e.to_string()),
    }
    suite.push(quadratic);

    let mut rng = sample::rng(seed, 0x3b);
    for _ in 0..FAMILY_DRAWS {
        match derivative_case(&s, &mut rng) {
            Ok(p) => derivative.bound(&p),
            Err(e) => derivative.fail(e.to_string()),
        }
    }
    suite.push(derivative);
    suite
}
