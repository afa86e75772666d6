//! Infection-time renderings and the stable-region checker.

use bootlab::lattice::{bootstrap_step, closure, Grid, InfectionField, NeighbourhoodRule};
use bootlab::mc::sample_seeds;

pub const COLORMAP_NOTE: &str =
    "linear blue (generation 0) to red (last generation); never infected = white";

/// A rendered closure: seeds, final configuration and generations.
pub struct Infection {
    pub seeds: Grid,
    pub closure: Grid,
    pub field: InfectionField,
}

/// Bernoulli(`p`) seeds on a `width × height` grid from trial stream 0 of
/// `seed`, closed under `rule`.
pub fn simulate_infection(width: usize, height: usize, p: f64, rule: &NeighbourhoodRule, seed: u64) -> Infection {
    let seeds = sample_seeds(width, height, p, seed, 0);
    let (closure, field) = closure(&seeds, rule);
    Infection {
        seeds,
        closure,
        field,
    }
}

pub fn color(time: Option<u32>, max: u32) -> [u8; 3] {
    match time {
        None => [255, 255, 255],
        Some(t) => {
            let s = if max == 0 { 0.0 } else { t as f64 / max as f64 };
            [(255.0 * s).round() as u8, 0, (255.0 * (1.0 - s)).round() as u8]
        }
    }
}

fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// SVG with one `rect` per horizontal run of equal colour. Row 0 is drawn
/// at the bottom.
pub fn infection_svg(field: &InfectionField) -> String {
    let (w, h) = (field.width(), field.height());
    let max = field.max_time().unwrap_or(0);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {w} {h}\" shape-rendering=\"crispEdges\">\n<desc>{COLORMAP_NOTE}; max generation {max}</desc>\n<rect width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>\n",
        w * 4,
        h * 4
    );
    for y in 0..h {
        let row = h - 1 - y;
        let mut x = 0;
        while x < w {
            let c = color(field.time(x, y), max);
            let start = x;
            while x < w && color(field.time(x, y), max) == c {
                x += 1;
            }
            if c != [255, 255, 255] {
                s.push_str(&format!(
                    "<rect x=\"{start}\" y=\"{row}\" width=\"{}\" height=\"1\" fill=\"{}\"/>\n",
                    x - start,
                    hex(c)
                ));
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

/// RGB PNG, one pixel per site.
#[cfg(feature = "png")]
pub fn infection_png(field: &InfectionField) -> std::io::Result<Vec<u8>> {
    let (w, h) = (field.width(), field.height());
    let max = field.max_time().unwrap_or(0);
    let mut data = Vec::with_capacity(w * h * 3);
    for y in (0..h).rev() {
        for x in 0..w {
            data.extend_from_slice(&color(field.time(x, y), max));
        }
    }
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, w as u32, h as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(std::io::Error::other)?;
        writer.write_image_data(&data).map_err(std::io::Error::other)?;
    }
    Ok(out)
}

/// One connected component of a closed configuration.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Region {
    pub cells: usize,
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
    pub rectangular: bool,
    /// Closed under the rule on its own.
    pub stable: bool,
}

/// Components of `config` under adjacency through the rule's offsets
/// (either direction), each checked for rectangularity and for being a
/// fixed point of the bootstrap operator in isolation.
pub fn stable_regions(config: &Grid, rule: &NeighbourhoodRule) -> Vec<Region> {
    let (w, h) = (config.width(), config.height());
    let mut seen = vec![false; w * h];
    let mut regions = Vec::new();
    let mut offsets: Vec<(i64, i64)> = rule
        .offsets()
        .iter()
        .flat_map(|&(dx, dy)| [(dx as i64, dy as i64), (-(dx as i64), -(dy as i64))])
        .collect();
    offsets.sort_unstable();
    offsets.dedup();
    for (sx, sy) in config.iter_occupied() {
        if seen[sy * w + sx] {
            continue;
        }
        seen[sy * w + sx] = true;
        let mut stack = vec![(sx, sy)];
        let mut members = Vec::new();
        while let Some((x, y)) = stack.pop() {
            members.push((x, y));
            for &(dx, dy) in &offsets {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                if config.get(nx, ny) && !seen[ny * w + nx] {
                    seen[ny * w + nx] = true;
                    stack.push((nx, ny));
                }
            }
        }
        let x0 = members.iter().map(|c| c.0).min().unwrap();
        let x1 = members.iter().map(|c| c.0).max().unwrap();
        let y0 = members.iter().map(|c| c.1).min().unwrap();
        let y1 = members.iter().map(|c| c.1).max().unwrap();
        let mut alone = Grid::bounded(w, h);
        for &(x, y) in &members {
            alone.set(x, y, true);
        }
        regions.push(Region {
            cells: members.len(),
            x0,
            y0,
            x1,
            y1,
            rectangular: members.len() == (x1 - x0 + 1) * (y1 - y0 + 1),
            stable: bootstrap_step(&alone, rule) == alone,
        });
    }
    regions
}
