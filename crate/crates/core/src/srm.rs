// SPDX-License-Identifier: Apache-2.0

//! The 30 SRM high-pass kernels and residual filtering.
//!
//! The bank holds the classic rich-model residual classes, each stored as
//! integer numerators in a centered 5×5 frame plus a divisor:
//!
//! | class       | count | divisor | base stencil                    |
//! |-------------|-------|---------|---------------------------------|
//! | 1st order   | 8     | 1       | `[-1, 1]`, 8 directions         |
//! | 2nd order   | 4     | 2       | `[1, -2, 1]`, 4 axes            |
//! | 3rd order   | 8     | 3       | `[1, -3, 3, -1]`, 8 directions  |
//! | SQUARE 3×3  | 1     | 4       | KB                              |
//! | SQUARE 5×5  | 1     | 12      | KV                              |
//! | EDGE 3×3    | 4     | 4       | half of KB, 4 rotations         |
//! | EDGE 5×5    | 4     | 12      | half of KV, 4 rotations         |
//!
//! Filtering is a same-size cross-correlation with reflect padding
//! (`-1 → 1`, `n → n - 2`).

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::image_io::{Image, ProbabilityMap};

pub const BANK_SIZE: usize = 30;
pub const KERNEL_SIZE: usize = 5;
const CENTER: isize = 2;

/// Smallest raster edge accepted by the filters.
pub const MIN_RASTER_EDGE: usize = 5;

const DIRECTIONS: [((isize, isize), &str); 8] = [
    ((0, 1), "E"),
    ((-1, 1), "NE"),
    ((-1, 0), "N"),
    ((-1, -1), "NW"),
    ((0, -1), "W"),
    ((1, -1), "SW"),
    ((1, 0), "S"),
    ((1, 1), "SE"),
];

const AXES: [((isize, isize), &str); 4] =
    [((0, 1), "H"), ((1, 0), "V"), ((1, 1), "D"), ((1, -1), "A")];

const KB: [[i32; 3]; 3] = [[-1, 2, -1], [2, -4, 2], [-1, 2, -1]];

const KV: [[i32; 5]; 5] = [
    [-1, 2, -2, 2, -1],
    [2, -6, 8, -6, 2],
    [-2, 8, -12, 8, -2],
    [2, -6, 8, -6, 2],
    [-1, 2, -2, 2, -1],
];

type Frame = [[i32; KERNEL_SIZE]; KERNEL_SIZE];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kernel {
    pub name: String,
    /// Row-major numerators; entry `[2][2]` sits on the output pixel.
    pub numerators: Frame,
    pub divisor: i32,
}

impl Kernel {
    pub fn coefficient(&self, dy: isize, dx: isize) -> f64 {
        let n = self.numerators[(dy + CENTER) as usize][(dx + CENTER) as usize];
        f64::from(n) / f64::from(self.divisor)
    }

    pub fn numerator_sum(&self) -> i32 {
        self.numerators.iter().flatten().sum()
    }

    /// `Σ |coefficient|`.
    pub fn abs_sum(&self) -> f64 {
        f64::from(
            self.numerators
                .iter()
                .flatten()
                .map(|n| n.abs())
                .sum::<i32>(),
        ) / f64::from(self.divisor)
    }

    /// Nonzero taps as `(dy, dx, numerator)`.
    fn taps(&self) -> Vec<(isize, isize, f64)> {
        let mut taps = Vec::new();
        for (r, row) in self.numerators.iter().enumerate() {
            for (c, &n) in row.iter().enumerate() {
                if n != 0 {
                    taps.push((r as isize - CENTER, c as isize - CENTER, f64::from(n)));
                }
            }
        }
        taps
    }

    fn absolute(&self) -> Kernel {
        let mut numerators = self.numerators;
        numerators.iter_mut().flatten().for_each(|n| *n = n.abs());
        Kernel {
            name: format!("|{}|", self.name),
            numerators,
            divisor: self.divisor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterBank {
    kernels: Vec<Kernel>,
}

impl FilterBank {
    pub fn new(kernels: Vec<Kernel>) -> Result<Self> {
        if kernels.len() != BANK_SIZE {
            return Err(Error::invalid(format!(
                "filter bank needs {BANK_SIZE} kernels, got {}",
                kernels.len()
            )));
        }
        if let Some(k) = kernels
            .iter()
            .find(|k| k.numerator_sum() != 0 || k.divisor <= 0)
        {
            return Err(Error::invalid(format!(
                "kernel {} is not a valid high-pass filter",
                k.name
            )));
        }
        Ok(Self { kernels })
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }
}

fn empty_frame() -> Frame {
    [[0; KERNEL_SIZE]; KERNEL_SIZE]
}

fn put(frame: &mut Frame, dy: isize, dx: isize, value: i32) {
    frame[(CENTER + dy) as usize][(CENTER + dx) as usize] = value;
}

/// Quarter turn counter-clockwise about the center.
fn rotate(frame: &Frame) -> Frame {
    let mut out = empty_frame();
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = frame[c][KERNEL_SIZE - 1 - r];
        }
    }
    out
}

fn rotations(base: Frame, prefix: &str, divisor: i32) -> impl Iterator<Item = Kernel> + '_ {
    std::iter::successors(Some(base), |f| Some(rotate(f)))
        .take(4)
        .enumerate()
        .map(move |(i, numerators)| Kernel {
            name: format!("{prefix}-{}", i * 90),
            numerators,
            divisor,
        })
}

/// The fixed 30-kernel bank, in table order.
pub fn filter_bank() -> FilterBank {
    let mut kernels = Vec::with_capacity(BANK_SIZE);

    for ((dy, dx), name) in DIRECTIONS {
        let mut f = empty_frame();
        put(&mut f, 0, 0, -1);
        put(&mut f, dy, dx, 1);
        kernels.push(Kernel {
            name: format!("1st-{name}"),
            numerators: f,
            divisor: 1,
        });
    }
    for ((dy, dx), name) in AXES {
        let mut f = empty_frame();
        put(&mut f, -dy, -dx, 1);
        put(&mut f, 0, 0, -2);
        put(&mut f, dy, dx, 1);
        kernels.push(Kernel {
            name: format!("2nd-{name}"),
            numerators: f,
            divisor: 2,
        });
    }
    for ((dy, dx), name) in DIRECTIONS {
        let mut f = empty_frame();
        put(&mut f, -dy, -dx, 1);
        put(&mut f, 0, 0, -3);
        put(&mut f, dy, dx, 3);
        put(&mut f, 2 * dy, 2 * dx, -1);
        kernels.push(Kernel {
            name: format!("3rd-{name}"),
            numerators: f,
            divisor: 3,
        });
    }

    let mut kb = empty_frame();
    for (r, row) in KB.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            kb[r + 1][c + 1] = v;
        }
    }
    kernels.push(Kernel {
        name: "square-3x3".into(),
        numerators: kb,
        divisor: 4,
    });
    kernels.push(Kernel {
        name: "square-5x5".into(),
        numerators: KV,
        divisor: 12,
    });

    let mut edge3 = kb;
    edge3[3] = [0; KERNEL_SIZE];
    kernels.extend(rotations(edge3, "edge-3x3", 4));
    let mut edge5 = KV;
    edge5[3] = [0; KERNEL_SIZE];
    edge5[4] = [0; KERNEL_SIZE];
    kernels.extend(rotations(edge5, "edge-5x5", 12));

    FilterBank::new(kernels).expect("built-in bank is valid")
}

/// Mirror index into `[0, n)` without repeating the edge sample.
#[inline]
pub fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let r = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    r as usize
}

/// One filtered plane per kernel, each the size of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualStack {
    width: usize,
    height: usize,
    planes: Vec<Vec<f64>>,
}

impl ResidualStack {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn planes(&self) -> &[Vec<f64>] {
        &self.planes
    }

    /// Mean squared residual of each plane.
    pub fn energies(&self) -> Vec<f64> {
        self.planes
            .iter()
            .map(|p| p.iter().map(|r| r * r).sum::<f64>() / p.len() as f64)
            .collect()
    }
}

fn correlate(values: &[f64], width: usize, height: usize, kernel: &Kernel) -> Vec<f64> {
    let taps = kernel.taps();
    let divisor = f64::from(kernel.divisor);
    let mut out = vec![0.0; values.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for &(dy, dx, n) in &taps {
                let yy = reflect(y as isize + dy, height);
                let xx = reflect(x as isize + dx, width);
                acc += n * values[yy * width + xx];
            }
            out[y * width + x] = acc / divisor;
        }
    }
    out
}

fn check_raster(width: usize, height: usize, len: usize) -> Result<()> {
    if width < MIN_RASTER_EDGE || height < MIN_RASTER_EDGE {
        return Err(Error::invalid(format!(
            "raster {width}x{height} is smaller than {MIN_RASTER_EDGE}x{MIN_RASTER_EDGE}"
        )));
    }
    if len != width * height {
        return Err(Error::LengthMismatch {
            expected: width * height,
            actual: len,
        });
    }
    Ok(())
}

/// Filters an arbitrary real raster with every kernel of the bank.
pub fn residuals_of_raster(values: &[f64], width: usize, height: usize) -> Result<ResidualStack> {
    check_raster(width, height, values.len())?;
    let planes = filter_bank()
        .kernels()
        .iter()
        .map(|k| correlate(values, width, height, k))
        .collect();
    Ok(ResidualStack {
        width,
        height,
        planes,
    })
}

pub fn residuals(img: &Image) -> Result<ResidualStack> {
    residuals_of_raster(&img.to_f64(), img.width(), img.height())
}

/// Filters a probability map with the absolute-valued kernels.
pub fn sca_residuals(pmap: &ProbabilityMap) -> Result<ResidualStack> {
    let (width, height) = pmap.dims();
    check_raster(width, height, pmap.len())?;
    let planes = filter_bank()
        .kernels()
        .iter()
        .map(|k| correlate(pmap.values(), width, height, &k.absolute()))
        .collect();
    Ok(ResidualStack {
        width,
        height,
        planes,
    })
}

/// Plain-text table: a `kernel <index> <name> divisor <d>` line followed by
/// five rows of five integer numerators, per kernel.
pub fn export_table(bank: &FilterBank) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# SRM high-pass bank: {} kernels, 5x5 integer numerators, coefficient = numerator / divisor",
        bank.len()
    );
    for (i, k) in bank.kernels().iter().enumerate() {
        let _ = writeln!(out, "kernel {i} {} divisor {}", k.name, k.divisor);
        for row in &k.numerators {
            let cells: Vec<String> = row.iter().map(i32::to_string).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
    }
    out
}

pub fn parse_table(text: &str) -> Result<FilterBank> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let mut kernels = Vec::new();
    while let Some(head) = lines.next() {
        let fields: Vec<&str> = head.split_whitespace().collect();
        let (name, divisor) = match fields.as_slice() {
            ["kernel", _, name, "divisor", d] => (
                name.to_string(),
                d.parse::<i32>()
                    .map_err(|_| Error::format(format!("bad divisor in {head:?}")))?,
            ),
            _ => {
                return Err(Error::format(format!(
                    "expected kernel header, got {head:?}"
                )))
            }
        };
        let mut numerators = empty_frame();
        for row in numerators.iter_mut() {
            let line = lines
                .next()
                .ok_or_else(|| Error::format(format!("kernel {name} is truncated")))?;
            let cells: Vec<i32> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::format(format!("bad row {line:?}")))?;
            if cells.len() != KERNEL_SIZE {
                return Err(Error::format(format!(
                    "row {line:?} needs {KERNEL_SIZE} entries"
                )));
            }
            row.copy_from_slice(&cells);
        }
        kernels.push(Kernel {
            name,
            numerators,
            divisor,
        });
    }
    FilterBank::new(kernels)
}
