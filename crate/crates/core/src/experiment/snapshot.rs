//! Grid state at a chosen time, rebuilt from an event log and drawn as a
//! binary graymap.

use std::io::Write;

use crate::engine::{EventKind, EventLog};
use crate::error::{Error, Result};

/// Ground-truth idleness per cell plus the cell each robot occupies.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: i64,
    pub cols: usize,
    pub rows: usize,
    /// Row-major, like grid ids.
    pub idleness: Vec<i64>,
    /// `(robot id, cell)`, ascending by robot id.
    pub robots: Vec<(usize, usize)>,
}

impl Snapshot {
    /// Replays deploy and visit records up to and including `t`. A robot is
    /// placed in the cell of its latest such record.
    pub fn from_log(log: &EventLog, cols: usize, rows: usize, t: i64) -> Result<Self> {
        let cells = cols * rows;
        let events = log.events();
        let t0 = events
            .iter()
            .find(|e| e.kind == EventKind::Deploy)
            .map(|e| e.t)
            .ok_or_else(|| Error::Input("event log has no deploy records".into()))?;
        let t_end = events.last().map_or(t0, |e| e.t);
        if t < t0 || t > t_end {
            return Err(Error::Input(format!(
                "time {t} is outside the logged range {t0}..={t_end}"
            )));
        }

        let mut last_visit = vec![t0; cells];
        let mut robot_cell: Vec<Option<usize>> = Vec::new();
        for e in events.iter().take_while(|e| e.t <= t) {
            if !matches!(e.kind, EventKind::Deploy | EventKind::Visit) {
                continue;
            }
            let k = e.grid.filter(|&k| k < cells).ok_or_else(|| {
                Error::Input(format!(
                    "record at t={} names grid {:?} outside a {cols}x{rows} grid",
                    e.t, e.grid
                ))
            })?;
            if e.kind == EventKind::Visit {
                last_visit[k] = e.t;
            }
            if robot_cell.len() <= e.robot {
                robot_cell.resize(e.robot + 1, None);
            }
            robot_cell[e.robot] = Some(k);
        }
        Ok(Snapshot {
            t,
            cols,
            rows,
            idleness: last_visit.iter().map(|&v| t - v).collect(),
            robots: robot_cell
                .iter()
                .enumerate()
                .filter_map(|(n, c)| c.map(|c| (n, c)))
                .collect(),
        })
    }
}

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSnapshot {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GridSnapshot {
    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// Draws each cell as a `scale`-pixel square whose gray level is
/// `255 * (1 - i / max_i)`, so the idlest cell is black. Grid row 0 is the
/// bottom of the image. Patrollers get a dark square with a light rim, the
/// base (robot 0) the inverse.
pub fn render_snapshot(s: &Snapshot, scale: usize) -> Result<GridSnapshot> {
    if scale < 4 {
        return Err(Error::Input(format!(
            "scale must be at least 4, got {scale}"
        )));
    }
    let (width, height) = (s.cols * scale, s.rows * scale);
    let max = s.idleness.iter().copied().max().unwrap_or(0);
    let mut pixels = vec![0u8; width * height];
    let mut fill = |k: usize, from: usize, to: usize, value: u8| {
        let (col, row) = (k % s.cols, k / s.cols);
        let top = (s.rows - 1 - row) * scale;
        for y in top + from..top + to {
            let start = y * width + col * scale;
            pixels[start + from..start + to].fill(value);
        }
    };
    for (k, &i) in s.idleness.iter().enumerate() {
        let level = if max == 0 {
            255
        } else {
            (255.0 * (1.0 - i as f64 / max as f64)).round() as u8
        };
        fill(k, 0, scale, level);
    }
    let (lo, hi) = (scale / 4, scale - scale / 4);
    for &(robot, k) in &s.robots {
        let (rim, core) = if robot == 0 { (0, 255) } else { (255, 0) };
        fill(k, lo, hi, rim);
        fill(k, lo + 1, hi - 1, core);
    }
    Ok(GridSnapshot {
        width,
        height,
        pixels,
    })
}

/// Binary PGM (P5).
pub fn write_pgm<W: Write>(mut out: W, image: &GridSnapshot) -> std::io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", image.width, image.height)?;
    out.write_all(&image.pixels)?;
    out.flush()
}
