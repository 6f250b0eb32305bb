//! Layered hyperelastic skin model and per-subject modulus calibration.
//!
//! The three skin layers share a fixed elasticity ratio; one scalar scale
//! `k` carries all between-subject variation, and its reciprocal is the
//! subject's softness index. The forward model is a one-dimensional
//! serial compression of incompressible Neo-Hookean layers under a
//! nominal contact area — deliberately simple enough to verify against
//! series expansions, while keeping the fitting problem's structure
//! (a single bounded scalar, an R² objective). The model sits behind
//! [`CompressionModel`] so a richer forward solver can be swapped in.

use serde::Serialize;

use crate::error::{Error, Result};

/// Incompressible Neo-Hookean material, parametrized by its initial shear
/// modulus. Uniaxial nominal stress is `P(lambda) = G (lambda - lambda^-2)`,
/// zero at rest and strictly increasing in stretch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaterialLaw {
    pub shear_modulus_kpa: f64,
}

impl MaterialLaw {
    pub fn new(shear_modulus_kpa: f64) -> Result<Self> {
        if shear_modulus_kpa <= 0.0 {
            return Err(Error::InvalidArgument(
                "shear modulus must be positive".into(),
            ));
        }
        Ok(Self { shear_modulus_kpa })
    }

    /// First strain-energy constant, `C10 = G / 2`, in kPa. The
    /// volumetric constant plays no role in the incompressible uniaxial
    /// reduction used here.
    pub fn c10_kpa(&self) -> f64 {
        self.shear_modulus_kpa / 2.0
    }

    /// Uniaxial nominal stress at stretch `lambda`, tension positive:
    /// `P(lambda) = G (lambda - lambda^-2)`, in kPa. Zero at rest and
    /// strictly increasing in stretch.
    pub fn nominal_stress_kpa(&self, lambda: f64) -> f64 {
        self.shear_modulus_kpa * (lambda - lambda.powi(-2))
    }

    /// Compressive nominal stress magnitude at stretch `lambda` in (0, 1]:
    /// `G (lambda^-2 - lambda)`, in kPa.
    pub fn compressive_stress_kpa(&self, lambda: f64) -> f64 {
        -self.nominal_stress_kpa(lambda)
    }

    /// Inverts the stress law for the stretch in (0, 1] at a compressive
    /// stress magnitude (kPa), by safeguarded Newton iteration.
    pub fn stretch_at_stress(&self, stress_kpa: f64) -> Result<f64> {
        if stress_kpa < 0.0 {
            return Err(Error::InvalidArgument(
                "compressive stress magnitude must be non-negative".into(),
            ));
        }
        if stress_kpa == 0.0 {
            return Ok(1.0);
        }
        let g = self.shear_modulus_kpa;
        let f = |l: f64| g * (l.powi(-2) - l) - stress_kpa;
        // f is strictly decreasing in lambda on (0, 1]; bracket from below.
        let mut lo = 1e-9;
        let mut hi = 1.0;
        let mut lambda = (1.0 + g / (g + stress_kpa)) / 2.0;
        for _ in 0..200 {
            let val = f(lambda);
            if val > 0.0 {
                lo = lambda;
            } else {
                hi = lambda;
            }
            let slope = g * (-2.0 * lambda.powi(-3) - 1.0);
            let mut next = lambda - val / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - lambda).abs() < 1e-15 {
                return Ok(next);
            }
            lambda = next;
        }
        if (hi - lo) < 1e-10 {
            Ok(lambda)
        } else {
            Err(Error::Numeric(format!(
                "stretch solve did not converge at stress {stress_kpa} kPa"
            )))
        }
    }
}

/// Fixed elasticity ratio of the epidermal, dermal, and hypodermal layers.
pub const LAYER_RATIO: [f64; 3] = [510.63, 21.37, 1.00];

/// Default layer thicknesses in mm: the epidermal-dermal interface sits
/// 0.47 mm beneath the surface; dermis and hypodermis defaults are
/// configurable nominal values.
pub const DEFAULT_THICKNESSES_MM: [f64; 3] = [0.47, 1.0, 3.0];

/// Default nominal contact area, mm² (order of a finger-pad contact).
pub const DEFAULT_CONTACT_AREA_MM2: f64 = 50.0;

/// Epidermis/dermis/hypodermis stack generated from the fixed ratio and a
/// scalar modulus scale `k`. The hypodermis modulus in kPa equals `k`.
#[derive(Debug, Clone, Serialize)]
pub struct LayerStack {
    pub thicknesses_mm: [f64; 3],
    pub moduli_kpa: [f64; 3],
    pub scale: f64,
    pub contact_area_mm2: f64,
}

impl LayerStack {
    pub fn from_scale(
        scale: f64,
        thicknesses_mm: [f64; 3],
        contact_area_mm2: f64,
    ) -> Result<Self> {
        let moduli_kpa = moduli_from_scale(scale)?;
        if thicknesses_mm.iter().any(|&t| t <= 0.0) {
            return Err(Error::InvalidArgument(
                "layer thicknesses must be positive".into(),
            ));
        }
        if contact_area_mm2 <= 0.0 {
            return Err(Error::InvalidArgument(
                "contact area must be positive".into(),
            ));
        }
        Ok(Self {
            thicknesses_mm,
            moduli_kpa,
            scale,
            contact_area_mm2,
        })
    }

    pub fn with_defaults(scale: f64) -> Result<Self> {
        Self::from_scale(scale, DEFAULT_THICKNESSES_MM, DEFAULT_CONTACT_AREA_MM2)
    }

    pub fn total_thickness_mm(&self) -> f64 {
        self.thicknesses_mm.iter().sum()
    }
}

/// Layer moduli (epidermis, dermis, hypodermis) in kPa for a scale `k`:
/// the fixed ratio times `k`.
pub fn moduli_from_scale(scale: f64) -> Result<[f64; 3]> {
    if scale <= 0.0 || !scale.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive, got {scale}"
        )));
    }
    Ok([
        LAYER_RATIO[0] * scale,
        LAYER_RATIO[1] * scale,
        LAYER_RATIO[2] * scale,
    ])
}

/// Softness index: the reciprocal of the modulus scale. Softer skin,
/// higher index.
pub fn softness_index(scale: f64) -> Result<f64> {
    if scale <= 0.0 || !scale.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive, got {scale}"
        )));
    }
    Ok(1.0 / scale)
}

/// Equilibrium state of the stack at one imposed displacement.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Compression {
    pub force_n: f64,
    pub stress_kpa: f64,
    /// Per-layer thickness loss, mm; sums to the imposed displacement.
    pub layer_compressions_mm: [f64; 3],
}

/// Forward model interface, so the serial stack can be replaced by a
/// richer solver without touching the fitting code.
pub trait CompressionModel {
    fn force_at(&self, displacement_mm: f64) -> Result<f64>;
}

impl CompressionModel for LayerStack {
    fn force_at(&self, displacement_mm: f64) -> Result<f64> {
        Ok(compress(self, displacement_mm)?.force_n)
    }
}

/// Solves serial equilibrium: one nominal stress runs through all layers,
/// and the stress is raised until the layer compressions sum to the
/// imposed displacement. Force is stress times the nominal area.
pub fn compress(stack: &LayerStack, displacement_mm: f64) -> Result<Compression> {
    let total = stack.total_thickness_mm();
    if displacement_mm < 0.0 {
        return Err(Error::InvalidArgument(
            "displacement must be non-negative".into(),
        ));
    }
    if displacement_mm >= total {
        return Err(Error::InvalidArgument(format!(
            "displacement {displacement_mm} mm reaches the stack thickness {total} mm"
        )));
    }
    let layers: Vec<MaterialLaw> = stack
        .moduli_kpa
        .iter()
        .map(|&g| MaterialLaw::new(g))
        .collect::<Result<_>>()?;
    if displacement_mm == 0.0 {
        return Ok(Compression {
            force_n: 0.0,
            stress_kpa: 0.0,
            layer_compressions_mm: [0.0; 3],
        });
    }
    let shorten = |stress: f64| -> Result<f64> {
        let mut sum = 0.0;
        for (law, &t) in layers.iter().zip(&stack.thicknesses_mm) {
            sum += t * (1.0 - law.stretch_at_stress(stress)?);
        }
        Ok(sum)
    };
    // The shortening is 0 at zero stress and grows monotonically toward
    // the total thickness; bracket then bisect.
    let mut hi = 3.0 * stack.moduli_kpa[2];
    while shorten(hi)? < displacement_mm {
        hi *= 2.0;
        if hi > 1e18 {
            return Err(Error::Numeric("stress bracket blew up".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shorten(mid)? < displacement_mm {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
    }
    let stress = 0.5 * (lo + hi);
    let mut compressions = [0.0; 3];
    let mut achieved = 0.0;
    for (i, (law, &t)) in layers.iter().zip(&stack.thicknesses_mm).enumerate() {
        compressions[i] = t * (1.0 - law.stretch_at_stress(stress)?);
        achieved += compressions[i];
    }
    if (achieved - displacement_mm).abs() > 1e-9 {
        return Err(Error::Numeric(format!(
            "equilibrium residual {:.3e} mm above tolerance",
            (achieved - displacement_mm).abs()
        )));
    }
    // kPa * mm^2 = 1e-3 N.
    let force_n = stress * stack.contact_area_mm2 * 1e-3;
    Ok(Compression {
        force_n,
        stress_kpa: stress,
        layer_compressions_mm: compressions,
    })
}

/// Force (N) of the layered stack at an imposed displacement (mm).
pub fn forward_compression(stack: &LayerStack, displacement_mm: f64) -> Result<f64> {
    Ok(compress(stack, displacement_mm)?.force_n)
}

/// A measured force-displacement curve from a compression test.
#[derive(Debug, Clone)]
pub struct MeasuredCurve {
    pub displacement_mm: Vec<f64>,
    pub force_n: Vec<f64>,
    pub label: String,
}

impl MeasuredCurve {
    pub fn new(displacement_mm: Vec<f64>, force_n: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if displacement_mm.len() != force_n.len() {
            return Err(Error::InvalidArgument("mismatched curve lengths".into()));
        }
        if displacement_mm.len() < 2 {
            return Err(Error::InsufficientData(
                "measured curve needs at least 2 points".into(),
            ));
        }
        if displacement_mm
            .iter()
            .chain(force_n.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidArgument("non-finite curve values".into()));
        }
        Ok(Self {
            displacement_mm,
            force_n,
            label: label.into(),
        })
    }
}

/// Default search bounds for the modulus scale.
pub const DEFAULT_SCALE_BOUNDS: (f64, f64) = (0.05, 50.0);

/// Result of fitting the modulus scale to measured curves.
#[derive(Debug, Clone, Serialize)]
pub struct ScaleFit {
    pub scale: f64,
    pub softness_index: f64,
    pub moduli_kpa: [f64; 3],
    /// Coefficient of determination per curve, reported as-is (a bad model
    /// can go negative).
    pub per_curve_r2: Vec<f64>,
    pub mean_r2: f64,
}

/// Fits the scalar modulus scale by maximizing the mean R² between the
/// forward model and the measured curves, with a golden-section search in
/// log scale over the bounds.
pub fn fit_scale(
    curves: &[MeasuredCurve],
    thicknesses_mm: [f64; 3],
    contact_area_mm2: f64,
    bounds: (f64, f64),
) -> Result<ScaleFit> {
    if curves.is_empty() {
        return Err(Error::InsufficientData("no measured curves".into()));
    }
    let (lo, hi) = bounds;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(
            "bounds must be positive and ordered".into(),
        ));
    }
    let total: f64 = thicknesses_mm.iter().sum();
    for curve in curves {
        if curve
            .displacement_mm
            .iter()
            .any(|&d| d < 0.0 || d >= total)
        {
            return Err(Error::InvalidArgument(format!(
                "curve `{}` has displacements outside [0, {total}) mm",
                curve.label
            )));
        }
    }
    let objective = |ln_k: f64| -> Result<f64> {
        let stack = LayerStack::from_scale(ln_k.exp(), thicknesses_mm, contact_area_mm2)?;
        Ok(mean_r2(&stack, curves)?.0)
    };
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = ln_lo;
    let mut b = ln_hi;
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    while (b - a) > 1e-7 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = objective(d)?;
        }
    }
    let ln_best = 0.5 * (a + b);
    let scale = ln_best.exp();
    // A flat objective across the bounds means the data carry no scale
    // information at all.
    let f_lo = objective(ln_lo)?;
    let f_hi = objective(ln_hi)?;
    let f_best = objective(ln_best)?;
    if (f_best - f_lo).abs() < 1e-12 && (f_best - f_hi).abs() < 1e-12 {
        return Err(Error::Fit(
            "objective is flat across the scale bounds".into(),
        ));
    }
    let stack = LayerStack::from_scale(scale, thicknesses_mm, contact_area_mm2)?;
    let (mean, per_curve) = mean_r2(&stack, curves)?;
    Ok(ScaleFit {
        scale,
        softness_index: 1.0 / scale,
        moduli_kpa: stack.moduli_kpa,
        per_curve_r2: per_curve,
        mean_r2: mean,
    })
}

fn mean_r2(stack: &LayerStack, curves: &[MeasuredCurve]) -> Result<(f64, Vec<f64>)> {
    let mut per_curve = Vec::with_capacity(curves.len());
    for curve in curves {
        let predicted: Vec<f64> = curve
            .displacement_mm
            .iter()
            .map(|&d| forward_compression(stack, d))
            .collect::<Result<_>>()?;
        per_curve.push(crate::stats::r_squared(&curve.force_n, &predicted)?);
    }
    let mean = per_curve.iter().sum::<f64>() / per_curve.len() as f64;
    Ok((mean, per_curve))
}
