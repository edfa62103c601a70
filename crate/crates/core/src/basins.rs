//! Grid sweeps over initial points and basin-map export.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::complexpoly::{Complex, Polynomial};
use crate::error::{Error, Result};
use crate::fmt_num;
use crate::objective::{LimitClass, PolyModulusObjective};
use crate::solvers::{run, IterationTrace, Method, SolverConfig};

/// Rectangular, corner-inclusive sampling window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || !(x_min < x_max) || !(y_min < y_max) {
            return Err(Error::InvalidConfig(format!(
                "grid window must satisfy x_min < x_max and y_min < y_max, got [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidConfig("grid resolution must be positive".into()));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        })
    }

    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, -half_width, half_width, n, n)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Written as `lo + (hi - lo) * k / (n - 1)` so a symmetric window with an
    /// odd count hits zero exactly. A single sample sits at the midpoint.
    fn coord(lo: f64, hi: f64, k: usize, n: usize) -> f64 {
        if n == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    }

    /// Sample at column `i` (x index) and row `j` (y index).
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [
            Self::coord(self.x_min, self.x_max, i, self.nx),
            Self::coord(self.y_min, self.y_max, j, self.ny),
        ]
    }

    /// Row-major flat index: `j * nx + i`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn points(&self) -> impl Iterator<Item = (usize, usize, [f64; 2])> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j, self.point(i, j))))
    }
}

/// Terminal classes and iteration counts over a grid, row-major (`j * nx + i`).
#[derive(Debug, Clone, PartialEq)]
pub struct BasinMap {
    pub grid: GridSpec,
    pub classes: Vec<LimitClass>,
    pub iterations: Vec<usize>,
    /// Roots that `Root(i)` indexes into.
    pub roots: Vec<Complex>,
}

impl BasinMap {
    pub fn class_at(&self, i: usize, j: usize) -> LimitClass {
        self.classes[self.grid.index(i, j)]
    }

    pub fn count(&self, pred: impl Fn(&LimitClass) -> bool) -> usize {
        self.classes.iter().filter(|c| pred(c)).count()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed for the run started at flat grid index `index`.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ index as u64)
}

/// Runs `method` from every grid point, in parallel, keeping the full traces.
pub fn sweep_traces(
    obj: &PolyModulusObjective,
    grid: &GridSpec,
    method: Method,
    cfg: &SolverConfig,
) -> Vec<IterationTrace> {
    let points: Vec<[f64; 2]> = grid.points().map(|(_, _, p)| p).collect();
    let base_seed = cfg.seed.unwrap_or(0);
    crate::worker_pool().install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(k, p)| {
                let point_cfg = SolverConfig {
                    seed: Some(point_seed(base_seed, k)),
                    ..cfg.clone()
                };
                run(obj, p, method, &point_cfg)
            })
            .collect()
    })
}

/// Basin map of `g` under `method`. Failed runs show up as `Undecided`.
pub fn render_basin(g: &Polynomial, grid: &GridSpec, method: Method, cfg: &SolverConfig) -> Result<BasinMap> {
    let obj = PolyModulusObjective::new(g.clone())?;
    Ok(basin_from_traces(&obj, grid, &sweep_traces(&obj, grid, method, cfg)))
}

pub fn basin_from_traces(obj: &PolyModulusObjective, grid: &GridSpec, traces: &[IterationTrace]) -> BasinMap {
    BasinMap {
        grid: *grid,
        classes: traces.iter().map(|t| t.terminal).collect(),
        iterations: traces.iter().map(|t| t.iterations()).collect(),
        roots: obj.roots().to_vec(),
    }
}

/// Analytic basins for a degree-two polynomial with roots `z1 != z2`: the side of
/// the perpendicular bisector decides; points within `1e-12` of it map to the
/// midpoint. `Root(0)` is `z1`, `Root(1)` is `z2`.
pub fn degree2_reference(z1: Complex, z2: Complex, grid: &GridSpec) -> Result<BasinMap> {
    if z1 == z2 {
        return Err(Error::InvalidConfig("reference needs two distinct roots".into()));
    }
    let mid = (z1 + z2) * 0.5;
    let axis = z1 - z2;
    let classes = grid
        .points()
        .map(|(_, _, p)| {
            let s = (p[0] - mid.re) * axis.re + (p[1] - mid.im) * axis.im;
            if s.abs() / axis.norm() <= 1e-12 {
                LimitClass::CriticalNonRoot(mid)
            } else if s > 0.0 {
                LimitClass::Root(0)
            } else {
                LimitClass::Root(1)
            }
        })
        .collect();
    Ok(BasinMap {
        grid: *grid,
        classes,
        iterations: vec![0; grid.len()],
        roots: vec![z1, z2],
    })
}

/// Base colors by root index, cycled for higher degrees.
pub const ROOT_PALETTE: [[u8; 3]; 8] = [
    [230, 60, 60],
    [60, 180, 75],
    [60, 100, 230],
    [240, 200, 40],
    [170, 70, 200],
    [40, 200, 200],
    [240, 130, 40],
    [200, 80, 150],
];
pub const CRITICAL_COLOR: [u8; 3] = [0, 0, 0];
pub const DIVERGED_COLOR: [u8; 3] = [255, 255, 255];
pub const UNDECIDED_COLOR: [u8; 3] = [128, 128, 128];

/// Pixel color. Root colors darken with `log(1 + iterations)`.
pub fn pixel_color(class: &LimitClass, iterations: usize) -> [u8; 3] {
    match class {
        LimitClass::Root(i) => {
            let base = ROOT_PALETTE[i % ROOT_PALETTE.len()];
            let shade = 1.0 / (1.0 + 0.15 * (1.0 + iterations as f64).ln());
            base.map(|c| (c as f64 * shade).round() as u8)
        }
        LimitClass::CriticalNonRoot(_) => CRITICAL_COLOR,
        LimitClass::Diverged => DIVERGED_COLOR,
        LimitClass::Undecided => UNDECIDED_COLOR,
    }
}

/// Binary PPM (P6), one pixel per sample; the top image row is `y_max`.
pub fn write_ppm<W: Write>(map: &BasinMap, mut out: W) -> std::io::Result<()> {
    let (nx, ny) = (map.grid.nx, map.grid.ny);
    write!(out, "P6\n{nx} {ny}\n255\n")?;
    let mut payload = Vec::with_capacity(3 * nx * ny);
    for row in 0..ny {
        let j = ny - 1 - row;
        for i in 0..nx {
            let k = map.grid.index(i, j);
            payload.extend_from_slice(&pixel_color(&map.classes[k], map.iterations[k]));
        }
    }
    out.write_all(&payload)
}

/// CSV rows `i,j,x,y,class,root_index,iterations`, `j` outer, `i` inner.
pub fn write_csv<W: Write>(map: &BasinMap, mut out: W) -> std::io::Result<()> {
    writeln!(out, "i,j,x,y,class,root_index,iterations")?;
    for (i, j, p) in map.grid.points() {
        let k = map.grid.index(i, j);
        let class = &map.classes[k];
        let root = class.root_index().map(|r| r.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{i},{j},{},{},{},{root},{}",
            fmt_num(p[0]),
            fmt_num(p[1]),
            class.name(),
            map.iterations[k]
        )?;
    }
    Ok(())
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut buf = std::io::BufWriter::new(file);
    body(&mut buf).map_err(io)?;
    buf.flush().map_err(io)
}

pub fn export_ppm(map: &BasinMap, path: &Path) -> Result<()> {
    write_file(path, |w| write_ppm(map, w))
}

pub fn export_csv(map: &BasinMap, path: &Path) -> Result<()> {
    write_file(path, |w| write_csv(map, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn odd_symmetric_grid_hits_zero() {
        let g = GridSpec::square(2.0, 201).unwrap();
        assert_eq!(g.point(100, 100), [0.0, 0.0]);
        assert_eq!(g.point(0, 200), [-2.0, 2.0]);
        assert!(GridSpec::new(1.0, 1.0, 0.0, 1.0, 3, 3).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.0, 1.0, 0, 3).is_err());
    }

    #[test]
    fn reference_examples() {
        let grid = GridSpec::new(-1.0, 1.0, 0.0, 10.0, 2, 2).unwrap();
        let r = degree2_reference(c(-1.0, 0.0), c(1.0, 0.0), &grid).unwrap();
        // single-point grids to probe specific locations
        let probe = |z1: Complex, z2: Complex, p: [f64; 2]| {
            let g = GridSpec::new(p[0] - 1.0, p[0] + 1.0, p[1] - 1.0, p[1] + 1.0, 1, 1).unwrap();
            degree2_reference(z1, z2, &g).unwrap().classes[0]
        };
        assert_eq!(probe(c(-1.0, 0.0), c(1.0, 0.0), [0.3, 5.0]), LimitClass::Root(1));
        assert_eq!(
            probe(c(-1.0, 0.0), c(1.0, 0.0), [0.0, 7.0]),
            LimitClass::CriticalNonRoot(c(0.0, 0.0))
        );
        assert_eq!(probe(c(1.0, 1.0), c(3.0, 1.0), [1.9, 40.0]), LimitClass::Root(0));
        assert_eq!(r.classes.len(), 4);
        assert!(degree2_reference(c(1.0, 0.0), c(1.0, 0.0), &grid).is_err());
    }

    fn uniform_map(nx: usize, ny: usize, class: LimitClass) -> BasinMap {
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, nx, ny).unwrap();
        BasinMap {
            grid,
            classes: vec![class; nx * ny],
            iterations: vec![0; nx * ny],
            roots: vec![c(0.0, 0.0)],
        }
    }

    #[test]
    fn ppm_layout() {
        let mut buf = Vec::new();
        write_ppm(&uniform_map(2, 2, LimitClass::Root(0)), &mut buf).unwrap();
        let header = b"P6\n2 2\n255\n";
        assert_eq!(&buf[..header.len()], header);
        let payload = &buf[header.len()..];
        assert_eq!(payload.len(), 12);
        assert!(payload.chunks(3).all(|px| px == [230, 60, 60]));

        let mut buf = Vec::new();
        write_ppm(&uniform_map(21, 21, LimitClass::Diverged), &mut buf).unwrap();
        assert!(buf.starts_with(b"P6\n21 21\n255\n"));
        assert_eq!(buf.len(), 13 + 21 * 21 * 3);
    }

    #[test]
    fn shading_only_darkens_roots() {
        assert_eq!(pixel_color(&LimitClass::Root(0), 0), [230, 60, 60]);
        let dark = pixel_color(&LimitClass::Root(0), 50);
        assert!(dark[0] < 230);
        assert_eq!(pixel_color(&LimitClass::Undecided, 50), UNDECIDED_COLOR);
        assert_eq!(pixel_color(&LimitClass::Diverged, 0), DIVERGED_COLOR);
        assert_eq!(
            pixel_color(&LimitClass::CriticalNonRoot(c(0.0, 0.0)), 3),
            CRITICAL_COLOR
        );
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&uniform_map(2, 2, LimitClass::Root(0)), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "i,j,x,y,class,root_index,iterations");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("0,0,"));
        assert!(lines[2].starts_with("1,0,"));
        assert!(lines[3].starts_with("0,1,"));
        assert!(lines[1].ends_with(",Root,0,0"));
    }

    #[test]
    fn newton_origin_is_exceptional() {
        let g = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 1, 1).unwrap();
        let map = render_basin(&g, &grid, Method::Newton1D, &SolverConfig::default_for(2)).unwrap();
        assert!(matches!(
            map.classes[0],
            LimitClass::CriticalNonRoot(_) | LimitClass::Undecided
        ));
        let mut buf = Vec::new();
        write_csv(&map, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }

    #[test]
    fn double_root_basin_is_single_class() {
        let g = Polynomial::from_real(&[0.0, 0.0, 1.0]);
        let grid = GridSpec::square(3.0, 9).unwrap();
        let map = render_basin(&g, &grid, Method::BnqnNewVariant, &SolverConfig::default_for(2)).unwrap();
        let bad: Vec<_> = map
            .classes
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != LimitClass::Root(0))
            .collect();
        assert!(bad.is_empty(), "{bad:?}");
    }
}
