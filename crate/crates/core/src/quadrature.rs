//! Deterministic numerical integration.
//!
//! [`integrate`] is a globally adaptive 21-point Gauss–Kronrod scheme (the
//! QUADPACK `qags` panel rule without extrapolation): the panel with the
//! largest error estimate is bisected until the summed estimate meets the
//! tolerance. The refinement order depends only on the integrand values, so
//! results are reproducible bit-for-bit; panel nodes may be evaluated in
//! parallel because they are summed in a fixed order.

#![allow(clippy::excessive_precision)]

use crate::par::{self, Execution};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_907_783_800,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod abscissae.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// 8-point Gauss–Legendre abscissae on [-1, 1] (positive half).
pub const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_804_939_476_142_360_184,
    0.525_532_409_916_328_985_817_739_049_189_254,
    0.796_666_477_413_626_739_591_553_936_475_831,
    0.960_289_856_497_536_231_683_560_868_569_473,
];

pub const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_361_982_965_150_449_277_196,
    0.313_706_645_877_887_287_337_962_201_986_601,
    0.222_381_034_453_374_470_544_355_994_426_241,
    0.101_228_536_290_376_259_152_531_354_309_962,
];

/// Calls `visit(x, w)` for the 8 Gauss–Legendre nodes mapped onto `[a, b]`.
#[inline]
pub fn for_each_gl8_node(a: f64, b: f64, mut visit: impl FnMut(f64, f64)) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        visit(mid - half * x, half * w);
        visit(mid + half * x, half * w);
    }
}

/// 8-point Gauss–Legendre estimate of `∫_a^b f`.
pub fn gauss_legendre_8(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for_each_gl8_node(a, b, |x, w| acc += w * f(x));
    acc
}

#[derive(Debug, Clone, Copy)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_panels: 2000,
        }
    }
}

impl QuadSettings {
    pub fn absolute(abs_tol: f64) -> Self {
        QuadSettings {
            abs_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
    /// `false` when the panel budget ran out before the tolerance was met.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod_nodes(a: f64, b: f64, out: &mut Vec<f64>) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for &x in &XGK[..10] {
        out.push(mid - half * x);
        out.push(mid + half * x);
    }
    out.push(mid);
}

/// Combines 21 function values (in `kronrod_nodes` order) into a panel.
fn assemble(a: f64, b: f64, fv: &[f64]) -> Panel {
    let half = 0.5 * (b - a);
    let fc = fv[20];
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut abs_k = (WGK[10] * fc).abs();
    for j in 0..10 {
        let (f1, f2) = (fv[2 * j], fv[2 * j + 1]);
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = kronrod * half;
    let resasc = asc * half.abs();
    let resabs = abs_k * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    let round_floor = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(round_floor);
    }
    Panel { a, b, value, error }
}

fn evaluate_panels<F>(f: &F, spans: &[(f64, f64)], exec: Execution) -> Vec<Panel>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let mut nodes = Vec::with_capacity(21 * spans.len());
    for &(a, b) in spans {
        kronrod_nodes(a, b, &mut nodes);
    }
    let values = par::map_slice(exec, &nodes, |&x| f(x));
    spans
        .iter()
        .zip(values.chunks_exact(21))
        .map(|(&(a, b), fv)| assemble(a, b, fv))
        .collect()
}

/// Adaptive Gauss–Kronrod integration of `f` over `[points[0], points[last]]`,
/// with the interior entries of `points` as mandatory panel boundaries.
///
/// `points` must be non-decreasing; zero-width spans are skipped.
pub fn integrate<F>(f: F, points: &[f64], settings: QuadSettings, exec: Execution) -> Integral
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let spans: Vec<(f64, f64)> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect();
    if spans.is_empty() {
        return Integral {
            value: 0.0,
            error: 0.0,
            panels: 0,
            converged: true,
        };
    }
    let mut panels = evaluate_panels(&f, &spans, exec);
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = settings.abs_tol.max(settings.rel_tol * value.abs());
        if error <= target || panels.len() >= settings.max_panels {
            return Integral {
                value,
                error,
                panels: panels.len(),
                converged: error <= target,
            };
        }
        // first maximum wins, keeping the refinement order deterministic
        let worst = panels
            .iter()
            .enumerate()
            .fold(0, |best, (i, p)| if p.error > panels[best].error { i } else { best });
        let Panel { a, b, .. } = panels[worst];
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) {
            // cannot split further in floating point
            return Integral {
                value,
                error,
                panels: panels.len(),
                converged: false,
            };
        }
        let halves = evaluate_panels(&f, &[(a, mid), (mid, b)], exec);
        panels[worst] = halves[0];
        panels.insert(worst + 1, halves[1]);
    }
}

/// Sequential shorthand for [`integrate`] over a single interval.
pub fn integrate_simple(f: impl Fn(f64) -> f64 + Sync + Send, a: f64, b: f64, abs_tol: f64) -> Integral {
    integrate(f, &[a, b], QuadSettings::absolute(abs_tol), Execution::Sequential)
}
