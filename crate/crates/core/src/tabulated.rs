//! Tabulated distance CDF with a monotone cubic interpolant.
//!
//! `F_L` is accumulated interval by interval from the numeric density on an
//! equally spaced grid over `[0, d_max]`, then interpolated with cubic
//! Hermite segments whose knot slopes are the exact densities, limited with
//! the Fritsch–Carlson condition so that the interpolant (and therefore its
//! derivative, the density served to downstream integrals) stays monotone.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::distance::cylinder_pair_pdf_numeric;
use crate::error::{Error, Result};
use crate::model::CylinderGeometry;
use crate::par::{self, Execution};
use crate::quadrature::{integrate, QuadSettings};

pub const DEFAULT_GRID_SIZE: usize = 2048;
pub const MIN_GRID_SIZE: usize = 64;

const CACHE_MAGIC: &str = "# cylcov-cdf v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpolantKind {
    MonotoneCubicHermite,
}

impl InterpolantKind {
    fn tag(self) -> &'static str {
        match self {
            InterpolantKind::MonotoneCubicHermite => "monotone-cubic-hermite",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDistribution {
    geometry: CylinderGeometry,
    spacing: f64,
    knots: Vec<f64>,
    cdf: Vec<f64>,
    slopes: Vec<f64>,
    raw_mass: f64,
    interpolant: InterpolantKind,
}

/// Builds the CDF table with the default execution mode.
pub fn build_cdf(geom: &CylinderGeometry, grid_size: usize) -> Result<TabulatedDistribution> {
    build_cdf_with(geom, grid_size, Execution::default())
}

pub fn build_cdf_with(geom: &CylinderGeometry, grid_size: usize, exec: Execution) -> Result<TabulatedDistribution> {
    if grid_size < MIN_GRID_SIZE {
        return Err(Error::domain(
            "build_cdf",
            format!("grid_size = {grid_size} < {MIN_GRID_SIZE}"),
        ));
    }
    let knots = knot_positions(geom, grid_size);
    let breaks = geom.regime_breaks();
    let settings = QuadSettings {
        abs_tol: 1e-14,
        rel_tol: 1e-13,
        max_panels: 64,
    };
    let increments = par::map_range(exec, grid_size - 1, |i| {
        let (a, b) = (knots[i], knots[i + 1]);
        let mut pts = vec![a];
        pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
        pts.push(b);
        integrate(|l| cylinder_pair_pdf_numeric(l, geom), &pts, settings, Execution::Sequential).value
    });
    let mut cdf = Vec::with_capacity(grid_size);
    let mut acc = 0.0;
    cdf.push(0.0);
    for inc in &increments {
        acc += inc;
        cdf.push(acc);
    }
    let raw_mass = acc;
    for v in cdf.iter_mut() {
        *v /= raw_mass;
    }
    *cdf.last_mut().expect("grid is non-empty") = 1.0;
    let densities = knot_densities(geom, &knots, exec);
    Ok(assemble(*geom, knots, cdf, &densities, raw_mass))
}

fn knot_positions(geom: &CylinderGeometry, grid_size: usize) -> Vec<f64> {
    let d_max = geom.max_distance();
    let last = (grid_size - 1) as f64;
    (0..grid_size)
        .map(|i| if i + 1 == grid_size { d_max } else { d_max * i as f64 / last })
        .collect()
}

fn knot_densities(geom: &CylinderGeometry, knots: &[f64], exec: Execution) -> Vec<f64> {
    par::map_slice(exec, knots, |&l| cylinder_pair_pdf_numeric(l, geom))
}

fn assemble(
    geometry: CylinderGeometry,
    knots: Vec<f64>,
    cdf: Vec<f64>,
    densities: &[f64],
    raw_mass: f64,
) -> TabulatedDistribution {
    let mut slopes: Vec<f64> = densities.iter().map(|d| d / raw_mass).collect();
    for i in 0..knots.len() - 1 {
        let h = knots[i + 1] - knots[i];
        let secant = (cdf[i + 1] - cdf[i]) / h;
        if secant <= 0.0 {
            slopes[i] = 0.0;
            slopes[i + 1] = 0.0;
            continue;
        }
        let a = slopes[i] / secant;
        let b = slopes[i + 1] / secant;
        let norm2 = a * a + b * b;
        if norm2 > 9.0 {
            let tau = 3.0 / norm2.sqrt();
            slopes[i] = tau * a * secant;
            slopes[i + 1] = tau * b * secant;
        }
    }
    let spacing = knots[1] - knots[0];
    TabulatedDistribution {
        geometry,
        spacing,
        knots,
        cdf,
        slopes,
        raw_mass,
        interpolant: InterpolantKind::MonotoneCubicHermite,
    }
}

impl TabulatedDistribution {
    pub fn geometry(&self) -> &CylinderGeometry {
        &self.geometry
    }

    pub fn grid_size(&self) -> usize {
        self.knots.len()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    pub fn interpolant(&self) -> InterpolantKind {
        self.interpolant
    }

    /// Mass of the numeric density before normalization (should be 1 to quadrature accuracy).
    pub fn raw_mass(&self) -> f64 {
        self.raw_mass
    }

    pub fn max_distance(&self) -> f64 {
        *self.knots.last().expect("grid is non-empty")
    }

    /// Index of the knot interval containing `l`, for `l` inside the support.
    #[inline]
    pub fn interval_of(&self, l: f64) -> usize {
        ((l / self.spacing) as usize).min(self.knots.len() - 2)
    }

    #[inline]
    fn segment(&self, l: f64) -> (usize, f64, f64) {
        let i = self.interval_of(l);
        let h = self.knots[i + 1] - self.knots[i];
        let t = ((l - self.knots[i]) / h).clamp(0.0, 1.0);
        (i, h, t)
    }

    /// `F_L(l)`.
    pub fn cdf(&self, l: f64) -> f64 {
        if !(l > 0.0) {
            return 0.0;
        }
        if l >= self.max_distance() {
            return 1.0;
        }
        let (i, h, t) = self.segment(l);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * self.cdf[i] + h10 * h * self.slopes[i] + h01 * self.cdf[i + 1] + h11 * h * self.slopes[i + 1];
        v.clamp(self.cdf[i], self.cdf[i + 1])
    }

    /// `1 − F_L(l)`.
    pub fn survival(&self, l: f64) -> f64 {
        1.0 - self.cdf(l)
    }

    /// `f_L(l)`, the derivative of the interpolated CDF.
    pub fn pdf(&self, l: f64) -> f64 {
        if !(l > 0.0) || l >= self.max_distance() {
            return 0.0;
        }
        let (i, h, t) = self.segment(l);
        let t2 = t * t;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -d00;
        let d11 = 3.0 * t2 - 2.0 * t;
        let v = (d00 * self.cdf[i] + d01 * self.cdf[i + 1]) / h + d10 * self.slopes[i] + d11 * self.slopes[i + 1];
        v.max(0.0)
    }

    /// Inverse of the interpolated CDF: safeguarded Newton steps inside the
    /// knot interval holding `p`, falling back to bisection.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let i = self.cdf.partition_point(|&c| c < p).clamp(1, self.knots.len() - 1);
        let (mut lo, mut hi) = (self.knots[i - 1], self.knots[i]);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        if c1 <= c0 {
            return lo;
        }
        let mut x = lo + (hi - lo) * (p - c0) / (c1 - c0);
        for _ in 0..100 {
            let r = self.cdf(x) - p;
            if r == 0.0 {
                return x;
            }
            if r < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = self.pdf(x);
            let newton = x - r / d;
            let next = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if next == x || hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
            x = next;
        }
        x
    }

    /// Serializes the table in the versioned columnar cache format.
    pub fn write_cache<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = String::new();
        let _ = writeln!(header, "{CACHE_MAGIC}");
        let _ = writeln!(header, "# interpolant={}", self.interpolant.tag());
        let _ = writeln!(header, "# radius={}", self.geometry.radius());
        let _ = writeln!(header, "# height={}", self.geometry.height());
        let _ = writeln!(header, "# grid_size={}", self.knots.len());
        let _ = writeln!(header, "# raw_mass={}", self.raw_mass);
        let _ = writeln!(header, "l,F_L");
        out.write_all(header.as_bytes())?;
        for (l, f) in self.knots.iter().zip(&self.cdf) {
            writeln!(out, "{l},{f}")?;
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_cache(std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    /// Reads a cache written by [`write_cache`](Self::write_cache) and checks
    /// that it was built for `expected`. Knot densities are recomputed, so the
    /// result is identical to a fresh build.
    pub fn read_cache<R: BufRead>(input: R, expected: &CylinderGeometry, origin: &Path) -> Result<Self> {
        let stale = |detail: String| Error::StaleCache {
            path: origin.to_path_buf(),
            detail,
        };
        let mut lines = input.lines();
        let mut next = || -> Result<String> {
            match lines.next() {
                Some(Ok(s)) => Ok(s),
                Some(Err(e)) => Err(Error::io(origin, e)),
                None => Err(stale("unexpected end of file".into())),
            }
        };
        let magic = next()?;
        if magic.trim() != CACHE_MAGIC {
            return Err(stale(format!("unrecognized header `{magic}`")));
        }
        let mut field = |name: &str| -> Result<String> {
            let line = next()?;
            line.strip_prefix("# ")
                .and_then(|s| s.strip_prefix(name))
                .and_then(|s| s.strip_prefix('='))
                .map(str::to_owned)
                .ok_or_else(|| stale(format!("expected `# {name}=...`, found `{line}`")))
        };
        let interp = field("interpolant")?;
        if interp != InterpolantKind::MonotoneCubicHermite.tag() {
            return Err(stale(format!("unknown interpolant `{interp}`")));
        }
        let num = |s: String, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| stale(format!("bad {what} `{s}`")))
        };
        let radius = num(field("radius")?, "radius")?;
        let height = num(field("height")?, "height")?;
        let grid_size: usize = {
            let s = field("grid_size")?;
            s.parse().map_err(|_| stale(format!("bad grid_size `{s}`")))?
        };
        let raw_mass = num(field("raw_mass")?, "raw_mass")?;
        if radius != expected.radius() || height != expected.height() {
            return Err(stale(format!(
                "cache built for R={radius}, H={height}; requested R={}, H={}",
                expected.radius(),
                expected.height()
            )));
        }
        if grid_size < MIN_GRID_SIZE {
            return Err(stale(format!("grid_size {grid_size} too small")));
        }
        if next()?.trim() != "l,F_L" {
            return Err(stale("missing column header".into()));
        }
        let expected_knots = knot_positions(expected, grid_size);
        let mut cdf = Vec::with_capacity(grid_size);
        for (row, want_l) in expected_knots.iter().enumerate() {
            let line = next()?;
            let (l, f) = line
                .split_once(',')
                .ok_or_else(|| stale(format!("row {row}: expected `l,F_L`")))?;
            let l = num(l.to_owned(), "l")?;
            let f = num(f.to_owned(), "F_L")?;
            if l != *want_l {
                return Err(stale(format!("row {row}: knot {l} does not match grid {want_l}")));
            }
            if !(0.0..=1.0).contains(&f) || cdf.last().is_some_and(|&prev| f < prev) {
                return Err(stale(format!("row {row}: F_L = {f} breaks monotonicity")));
            }
            cdf.push(f);
        }
        if cdf[0] != 0.0 || cdf[grid_size - 1] != 1.0 {
            return Err(stale("CDF does not span [0, 1]".into()));
        }
        if let Some(Ok(extra)) = lines.next() {
            if !extra.trim().is_empty() {
                return Err(stale(format!("trailing data `{extra}`")));
            }
        }
        let densities = knot_densities(expected, &expected_knots, Execution::default());
        Ok(assemble(*expected, expected_knots, cdf, &densities, raw_mass))
    }

    pub fn load(path: &Path, expected: &CylinderGeometry) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_cache(BufReader::new(file), expected, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(r: f64, h: f64, n: usize) -> TabulatedDistribution {
        build_cdf(&CylinderGeometry::new(r, h).unwrap(), n).unwrap()
    }

    #[test]
    fn endpoints_and_mass() {
        for (r, h) in [(120.0, 20.0), (20.0, 120.0), (50.0, 50.0), (10.0, 200.0)] {
            let t = table(r, h, DEFAULT_GRID_SIZE);
            assert_eq!(t.cdf(0.0), 0.0);
            assert_eq!(t.cdf(t.max_distance()), 1.0);
            assert!((t.raw_mass() - 1.0).abs() < 1e-9, "raw mass {}", t.raw_mass());
            assert!(t.cdf_values().windows(2).all(|w| w[1] >= w[0]));
            assert_eq!(t.pdf(-1.0), 0.0);
            assert_eq!(t.pdf(t.max_distance() + 1.0), 0.0);
        }
    }

    #[test]
    fn rejects_small_grids() {
        assert!(build_cdf(&CylinderGeometry::new(1.0, 1.0).unwrap(), 63).is_err());
    }

    #[test]
    fn interpolation_accuracy() {
        for (r, h) in [(120.0, 20.0), (20.0, 120.0), (50.0, 50.0), (10.0, 200.0)] {
            let g = CylinderGeometry::new(r, h).unwrap();
            let t = build_cdf(&g, DEFAULT_GRID_SIZE).unwrap();
            let d = g.max_distance();
            let mut worst: f64 = 0.0;
            for i in 0..3001 {
                let l = d * (i as f64 + 0.37) / 3001.0;
                worst = worst.max((t.pdf(l) - cylinder_pair_pdf_numeric(l, &g)).abs());
            }
            assert!(worst < 1e-7, "R={r} H={h}: worst density error {worst:e}");
        }
    }

    #[test]
    fn interpolant_is_monotone_on_coarse_grid() {
        let t = table(120.0, 20.0, 64);
        let d = t.max_distance();
        let mut prev = 0.0;
        for i in 0..=20_000 {
            let v = t.cdf(d * i as f64 / 20_000.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn cache_round_trip_is_bit_exact() {
        let g = CylinderGeometry::new(20.0, 120.0).unwrap();
        let t = build_cdf(&g, 256).unwrap();
        let mut buf = Vec::new();
        t.write_cache(&mut buf).unwrap();
        let back = TabulatedDistribution::read_cache(&buf[..], &g, Path::new("mem")).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn cache_rejects_mismatch_and_corruption() {
        let g = CylinderGeometry::new(20.0, 120.0).unwrap();
        let t = build_cdf(&g, 128).unwrap();
        let mut buf = Vec::new();
        t.write_cache(&mut buf).unwrap();
        let other = CylinderGeometry::new(21.0, 120.0).unwrap();
        let err = TabulatedDistribution::read_cache(&buf[..], &other, Path::new("mem")).unwrap_err();
        assert!(matches!(err, Error::StaleCache { .. }), "{err}");

        let text = String::from_utf8(buf).unwrap();
        let truncated: String = text.lines().take(50).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            TabulatedDistribution::read_cache(truncated.as_bytes(), &g, Path::new("mem")),
            Err(Error::StaleCache { .. })
        ));
        let garbled = text.replacen("# cylcov-cdf v1", "# cylcov-cdf v9", 1);
        assert!(TabulatedDistribution::read_cache(garbled.as_bytes(), &g, Path::new("mem")).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let t = table(120.0, 20.0, 512);
        for p in [0.01, 0.25, 0.5, 0.9, 0.999] {
            assert!((t.cdf(t.quantile(p)) - p).abs() < 1e-12);
        }
    }
}
