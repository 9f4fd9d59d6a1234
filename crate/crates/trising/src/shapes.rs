//! Convex shapes on the triangular lattice and their count vectors.
//!
//! A shape lives inside an `R × N` parallelogram of sites `(r, c)`,
//! `r = 1..=R` bottom to top, `c = 1..=N`. Row `r` occupies the contiguous
//! column span `spans[r-1]`. Edge types:
//!
//! * type 1 — horizontal, `(r,c)-(r,c+1)`;
//! * type 2 — parallel to the sloping sides, `(r,c)-(r+1,c)`;
//! * type 3 — the remaining diagonal, `(r,c+1)-(r+1,c)`.
//!
//! The catalog covers the parallelogram, the parallelogram with one 60°
//! corner clipped, the triangle and the regular hexagon. Arbitrary convex
//! span profiles are accepted through [`Shape::from_spans`] and validated by
//! the boundary walk. Cyclic rotations of the edge types stand in for the
//! 120°-rotated copies of a shape: the partition function of the rotated
//! shape equals the plain one evaluated at cyclically permuted weights.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Catalog names.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum ShapeName {
    Parallelogram,
    Clipped,
    Triangle,
    Hexagon,
}

impl fmt::Display for ShapeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ShapeName::Parallelogram => "parallelogram",
            ShapeName::Clipped => "clipped",
            ShapeName::Triangle => "triangle",
            ShapeName::Hexagon => "hexagon",
        };
        write!(f, "{s}")
    }
}

/// Cyclic permutation of the three edge types.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Rotation {
    R0,
    R1,
    R2,
}

impl Rotation {
    /// Rotated type of a plain type-`t` edge (`t` in `0..3`, zero-based).
    pub fn map(self, t: usize) -> usize {
        match self {
            Rotation::R0 => t,
            Rotation::R1 => (t + 1) % 3,
            Rotation::R2 => (t + 2) % 3,
        }
    }

    pub fn inverse(self) -> Rotation {
        match self {
            Rotation::R0 => Rotation::R0,
            Rotation::R1 => Rotation::R2,
            Rotation::R2 => Rotation::R1,
        }
    }
}

/// Site, surface-site, corner and edge counts of a shape.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CountVector {
    /// Total number of sites (surfaces and corners included).
    pub n_b: i64,
    /// Surface sites per type, adjacent corners included.
    pub n_s: [i64; 3],
    /// 60° corners per type.
    pub n_c: [i64; 3],
    /// 120° corners per type.
    pub nt_c: [i64; 3],
    /// Edge counts per type.
    pub n_edges: [i64; 3],
}

impl CountVector {
    /// Aggregated isotropic counts `{n_b, n_s, n_c, ñ_c}`.
    pub fn isotropic(&self) -> [i64; 4] {
        [
            self.n_b,
            self.n_s.iter().sum(),
            self.n_c.iter().sum(),
            self.nt_c.iter().sum(),
        ]
    }

    /// The common value of `n_c[i] - ñ_c[i]`, which every convex shape shares
    /// across types.
    pub fn corner_difference(&self) -> Result<i64> {
        let d = self.n_c[0] - self.nt_c[0];
        for i in 1..3 {
            if self.n_c[i] - self.nt_c[i] != d {
                return Err(Error::InvalidShape(
                    "corner-difference identity violated".into(),
                ));
            }
        }
        Ok(d)
    }

    /// Number of distinct boundary sites.
    pub fn boundary_sites(&self) -> i64 {
        (0..3)
            .map(|i| self.n_s[i] - self.n_c[i] - self.nt_c[i])
            .sum()
    }

    /// Counts of the same shape with edge types cyclically permuted.
    pub fn rotate(&self, rot: Rotation) -> CountVector {
        let mut out = self.clone();
        for t in 0..3 {
            let rt = rot.map(t);
            out.n_s[rt] = self.n_s[t];
            out.n_c[rt] = self.n_c[t];
            out.nt_c[rt] = self.nt_c[t];
            out.n_edges[rt] = self.n_edges[t];
        }
        out
    }
}

/// A deleted transfer-matrix factor, identified by kind, block and position.
///
/// Block 0 is the standalone bottom-row product; block `r ≥ 1` is the
/// row-`r` to row-`r+1` transition. Positions are the `m` of the factor.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Deletion {
    pub kind: FactorKind,
    pub block: usize,
    pub m: usize,
}

/// The three local transfer-matrix factor kinds.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum FactorKind {
    U,
    V,
    W,
}

/// A convex shape on the triangular lattice.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Shape {
    pub name: ShapeName,
    /// Catalog size parameters as given to [`make_shape`].
    pub m: i64,
    pub n: i64,
    rows: usize,
    cols: usize,
    /// 1-based inclusive column span per row, bottom row first.
    spans: Vec<(i64, i64)>,
}

/// Build a catalog shape. `(M, N)` must be admissible for the name:
/// triangle and hexagon require `M == N` (hexagon odd), clipped needs
/// `M, N ≥ 4`, and every catalog shape needs `M, N ≥ 3` so the low-order
/// structure of the partition function is shape-generic.
pub fn make_shape(name: ShapeName, m: i64, n: i64) -> Result<Shape> {
    match name {
        ShapeName::Parallelogram => {
            if m < 3 || n < 3 {
                return Err(Error::InvalidShape(format!(
                    "parallelogram needs M,N ≥ 3, got {m}×{n}"
                )));
            }
            let spans = vec![(1, n); m as usize];
            Shape::from_spans(name, m, n, spans)
        }
        ShapeName::Clipped => {
            if m < 4 || n < 4 {
                return Err(Error::InvalidShape(format!(
                    "clipped parallelogram needs M,N ≥ 4, got {m}×{n}"
                )));
            }
            let mut spans = vec![(1, n); m as usize];
            spans[0] = (3, n);
            spans[1] = (2, n);
            Shape::from_spans(name, m, n, spans)
        }
        ShapeName::Triangle => {
            if m != n {
                return Err(Error::InvalidShape(format!(
                    "triangle needs M == N, got {m}×{n}"
                )));
            }
            if m < 3 {
                return Err(Error::InvalidShape("triangle needs side ≥ 3".into()));
            }
            let spans = (1..=m).map(|r| (1, m - r + 1)).collect();
            Shape::from_spans(name, m, n, spans)
        }
        ShapeName::Hexagon => {
            if m != n || m % 2 == 0 || m < 3 {
                return Err(Error::InvalidShape(format!(
                    "hexagon needs odd M == N ≥ 3, got {m}×{n}"
                )));
            }
            let l = (m + 1) / 2;
            let spans = (1..=m)
                .map(|r| {
                    if r <= l {
                        (l - r + 1, 2 * l - 1)
                    } else {
                        (1, 3 * l - 1 - r)
                    }
                })
                .collect();
            Shape::from_spans(name, m, n, spans)
        }
    }
}

impl Shape {
    /// Build a shape from explicit row spans, validating convexity through
    /// the boundary walk.
    pub fn from_spans(name: ShapeName, m: i64, n: i64, spans: Vec<(i64, i64)>) -> Result<Shape> {
        if spans.is_empty() {
            return Err(Error::InvalidShape("no rows".into()));
        }
        let cols = spans.iter().map(|s| s.1).max().unwrap();
        let shape = Shape {
            name,
            m,
            n,
            rows: spans.len(),
            cols: cols as usize,
            spans,
        };
        for w in &shape.spans {
            if w.0 < 1 || w.1 < w.0 {
                return Err(Error::InvalidShape(format!("bad span {w:?}")));
            }
        }
        for r in 0..shape.rows - 1 {
            let (l0, r0) = shape.spans[r];
            let (l1, r1) = shape.spans[r + 1];
            if !(l1 == l0 || l1 == l0 - 1) || !(r1 == r0 || r1 == r0 - 1) {
                return Err(Error::InvalidShape(format!(
                    "rows {} and {} are not joined by lattice directions",
                    r + 1,
                    r + 2
                )));
            }
        }
        // The boundary walk both validates convexity and is what counts use.
        shape.walk()?;
        Ok(shape)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Column count of the bounding parallelogram (the transfer-matrix width).
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn span(&self, r: usize) -> (i64, i64) {
        self.spans[r - 1]
    }

    pub fn contains(&self, r: i64, c: i64) -> bool {
        r >= 1
            && r <= self.rows as i64
            && c >= self.spans[(r - 1) as usize].0
            && c <= self.spans[(r - 1) as usize].1
    }

    pub fn num_sites(&self) -> i64 {
        self.spans.iter().map(|(l, r)| r - l + 1).sum()
    }

    pub fn sites(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (1..=self.rows as i64)
            .flat_map(move |r| (self.spans[(r - 1) as usize].0..=self.spans[(r - 1) as usize].1).map(move |c| (r, c)))
    }

    /// Edges of type `t` (0-based) as site pairs.
    pub fn edges(&self, t: usize) -> Vec<((i64, i64), (i64, i64))> {
        let mut out = Vec::new();
        for (r, c) in self.sites() {
            let other = match t {
                0 => (r, c + 1),
                1 => (r + 1, c),
                _ => (r + 1, c - 1),
            };
            if self.contains(other.0, other.1) {
                out.push(((r, c), other));
            }
        }
        out
    }

    /// Boundary walk: maximal straight faces and the corners between them.
    fn walk(&self) -> Result<Walk> {
        // Directions d0..d5: type = d mod 3; d0..d2 traverse up/right, d3..d5
        // back down. Counterclockwise from the bottom-left site.
        let rows = self.rows as i64;
        let mut steps: Vec<usize> = Vec::new();
        let (bl, br) = self.spans[0];
        for _ in bl..br {
            steps.push(0);
        }
        for r in 1..rows {
            let rp = self.spans[(r - 1) as usize].1;
            let rn = self.spans[r as usize].1;
            if rn == rp {
                steps.push(1);
            } else if rn == rp - 1 {
                steps.push(2);
            } else {
                return Err(Error::InvalidShape("right boundary not convex".into()));
            }
        }
        let (tl, tr) = self.spans[(rows - 1) as usize];
        for _ in tl..tr {
            steps.push(3);
        }
        for r in (1..rows).rev() {
            let ln = self.spans[(r - 1) as usize].0;
            let lp = self.spans[r as usize].0;
            if ln == lp {
                steps.push(4);
            } else if ln == lp + 1 {
                steps.push(5);
            } else {
                return Err(Error::InvalidShape("left boundary not convex".into()));
            }
        }
        // Group into maximal runs (faces).
        let mut runs: Vec<(usize, i64)> = Vec::new();
        for &d in &steps {
            match runs.last_mut() {
                Some((dir, len)) if *dir == d => *len += 1,
                _ => runs.push((d, 1)),
            }
        }
        // Merge a wrap-around run (possible when the bottom face is absent).
        if runs.len() > 1 && runs.first().map(|r| r.0) == runs.last().map(|r| r.0) {
            let (_, len) = runs.pop().unwrap();
            runs[0].1 += len;
        }
        if runs.len() < 3 {
            return Err(Error::InvalidShape("degenerate boundary".into()));
        }
        // Convexity: every turn is 1 or 2 sixths of a full circle.
        let k = runs.len();
        let mut corners = Vec::with_capacity(k);
        for i in 0..k {
            let d_prev = runs[i].0;
            let d_next = runs[(i + 1) % k].0;
            let turn = (d_next + 6 - d_prev) % 6;
            match turn {
                1 | 2 => corners.push(Corner {
                    sixty: turn == 2,
                    face_types: (d_prev % 3, d_next % 3),
                }),
                _ => return Err(Error::InvalidShape("non-convex corner".into())),
            }
        }
        Ok(Walk { runs, corners })
    }

    /// Site, surface, corner and edge counts.
    pub fn counts(&self) -> CountVector {
        let walk = self.walk().expect("validated at construction");
        let mut n_s = [0i64; 3];
        for (d, len) in &walk.runs {
            n_s[d % 3] += len + 1;
        }
        let mut n_c = [0i64; 3];
        let mut nt_c = [0i64; 3];
        for corner in &walk.corners {
            let (a, b) = corner.face_types;
            debug_assert_ne!(a, b);
            let t = 3 - a - b;
            if corner.sixty {
                n_c[t] += 1;
            } else {
                nt_c[t] += 1;
            }
        }
        let n_edges = [
            self.edges(0).len() as i64,
            self.edges(1).len() as i64,
            self.edges(2).len() as i64,
        ];
        CountVector {
            n_b: self.num_sites(),
            n_s,
            n_c,
            nt_c,
            n_edges,
        }
    }

    /// Factors to delete from the full bounding-parallelogram transfer chain:
    /// every factor whose lattice edge is absent from the shape. Factor index
    /// `m` addresses lattice columns through the mirror `c = N+1-m`; the
    /// standalone block 0 holds the bottom row's horizontal edges and block
    /// `r`'s U's the row-(r+1) horizontals.
    pub fn deletions(&self) -> Vec<Deletion> {
        let mut out = Vec::new();
        let rows = self.rows as i64;
        let n = self.cols as i64;
        for mm in 1..n {
            if !(self.contains(1, n - mm) && self.contains(1, n + 1 - mm)) {
                out.push(Deletion {
                    kind: FactorKind::U,
                    block: 0,
                    m: mm as usize,
                });
            }
        }
        for r in 1..rows {
            for mm in 1..n {
                if !(self.contains(r + 1, n - mm) && self.contains(r + 1, n + 1 - mm)) {
                    out.push(Deletion {
                        kind: FactorKind::U,
                        block: r as usize,
                        m: mm as usize,
                    });
                }
            }
            for mm in 1..=n {
                if !(self.contains(r, n + 1 - mm) && self.contains(r + 1, n + 1 - mm)) {
                    out.push(Deletion {
                        kind: FactorKind::V,
                        block: r as usize,
                        m: mm as usize,
                    });
                }
            }
            for mm in 1..n {
                if !(self.contains(r, n + 1 - mm) && self.contains(r + 1, n - mm)) {
                    out.push(Deletion {
                        kind: FactorKind::W,
                        block: r as usize,
                        m: mm as usize,
                    });
                }
            }
        }
        out
    }
}

struct Corner {
    sixty: bool,
    face_types: (usize, usize),
}

struct Walk {
    runs: Vec<(usize, i64)>,
    corners: Vec<Corner>,
}

/// A catalog shape together with a type rotation, the unit of work for
/// free-energy extraction families.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub shape: Shape,
    pub rot: Rotation,
}

impl ShapeSpec {
    pub fn plain(shape: Shape) -> Self {
        ShapeSpec {
            shape,
            rot: Rotation::R0,
        }
    }

    pub fn counts(&self) -> CountVector {
        self.shape.counts().rotate(self.rot)
    }

    /// Parse `name:M:N` (as used by the command line).
    pub fn parse(text: &str) -> Result<ShapeSpec> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidShape(format!(
                "expected name:M:N, got `{text}`"
            )));
        }
        let name = match parts[0] {
            "parallelogram" | "par" => ShapeName::Parallelogram,
            "clipped" | "clip" => ShapeName::Clipped,
            "triangle" | "tri" => ShapeName::Triangle,
            "hexagon" | "hex" => ShapeName::Hexagon,
            other => {
                return Err(Error::InvalidShape(format!("unknown shape `{other}`")));
            }
        };
        let m: i64 = parts[1]
            .parse()
            .map_err(|_| Error::InvalidShape(format!("bad M `{}`", parts[1])))?;
        let n: i64 = parts[2]
            .parse()
            .map_err(|_| Error::InvalidShape(format!("bad N `{}`", parts[2])))?;
        Ok(ShapeSpec::plain(make_shape(name, m, n)?))
    }
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.shape.name, self.shape.m, self.shape.n)?;
        match self.rot {
            Rotation::R0 => Ok(()),
            Rotation::R1 => write!(f, ":r1"),
            Rotation::R2 => write!(f, ":r2"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallelogram_counts() {
        let s = make_shape(ShapeName::Parallelogram, 7, 5).unwrap();
        let c = s.counts();
        assert_eq!(c.n_b, 35);
        assert_eq!(c.n_s, [10, 14, 0]);
        assert_eq!(c.n_c, [0, 0, 2]);
        assert_eq!(c.nt_c, [0, 0, 2]);
        assert_eq!(c.n_edges, [28, 30, 24]);
        assert_eq!(c.isotropic(), [35, 24, 2, 2]);
        assert_eq!(c.corner_difference().unwrap(), 0);
    }

    #[test]
    fn clipped_counts() {
        let s = make_shape(ShapeName::Clipped, 7, 5).unwrap();
        let c = s.counts();
        assert_eq!(c.n_b, 32);
        assert_eq!(c.n_s, [8, 12, 3]);
        assert_eq!(c.n_c, [0, 0, 1]);
        assert_eq!(c.nt_c, [1, 1, 2]);
        // One fewer of each: 3 type-1, 3 type-2, 1 type-3 edge removed.
        assert_eq!(c.n_edges, [25, 27, 23]);
        assert_eq!(c.isotropic(), [32, 23, 1, 4]);
        assert_eq!(c.corner_difference().unwrap(), -1);
    }

    #[test]
    fn triangle_and_hexagon_counts() {
        let t = make_shape(ShapeName::Triangle, 7, 7).unwrap();
        assert_eq!(t.counts().isotropic(), [28, 21, 3, 0]);
        assert_eq!(t.counts().n_s, [7, 7, 7]);
        assert_eq!(t.counts().n_c, [1, 1, 1]);
        let h = make_shape(ShapeName::Hexagon, 7, 7).unwrap();
        assert_eq!(h.counts().isotropic(), [37, 24, 0, 6]);
        assert_eq!(h.counts().n_s, [8, 8, 8]);
        assert_eq!(h.counts().nt_c, [2, 2, 2]);
    }

    #[test]
    fn edge_totals_cross_check() {
        for spec in ["par:5:6", "clipped:5:5", "tri:6:6", "hex:5:5"] {
            let s = ShapeSpec::parse(spec).unwrap().shape;
            let c = s.counts();
            let direct: usize = (0..3).map(|t| s.edges(t).len()).sum();
            assert_eq!(c.n_edges.iter().sum::<i64>(), direct as i64, "{spec}");
            c.corner_difference().unwrap();
            // Corner count equals the polygon's vertex count.
            let vertices: i64 = c.n_c.iter().sum::<i64>() + c.nt_c.iter().sum::<i64>();
            assert!(vertices >= 3);
            // Boundary sites from the inclusion-corrected formula.
            assert!(c.boundary_sites() > 0);
        }
    }

    #[test]
    fn rotation_permutes_counts() {
        let s = make_shape(ShapeName::Parallelogram, 7, 5).unwrap();
        let c = ShapeSpec {
            shape: s,
            rot: Rotation::R1,
        }
        .counts();
        assert_eq!(c.n_s, [0, 10, 14]);
        assert_eq!(c.n_c, [2, 0, 0]);
        assert_eq!(c.nt_c, [2, 0, 0]);
    }

    #[test]
    fn inadmissible_shapes_are_rejected() {
        assert!(make_shape(ShapeName::Parallelogram, 2, 5).is_err());
        assert!(make_shape(ShapeName::Triangle, 4, 5).is_err());
        assert!(make_shape(ShapeName::Hexagon, 6, 6).is_err());
        assert!(make_shape(ShapeName::Clipped, 3, 5).is_err());
    }

    #[test]
    fn clipped_deletion_list_matches_recipe() {
        // Clipping the 60° corner deletes U_{N-2,N-1} and U_{N-1,N} before
        // the contraction, then U_{N-1,N}, V_{N-1}, V_N and W_{N-1,N} in the
        // first transition block and V_N in the second.
        let s = make_shape(ShapeName::Clipped, 7, 5).unwrap();
        let n = 5usize;
        let mut d = s.deletions();
        d.sort_by_key(|d| (d.block, d.m, d.kind as usize));
        use FactorKind::*;
        let expected = vec![
            (U, 0, n - 2),
            (U, 0, n - 1),
            (U, 1, n - 1),
            (V, 1, n - 1),
            (V, 1, n),
            (W, 1, n - 1),
            (V, 2, n),
        ];
        let mut expected: Vec<Deletion> = expected
            .into_iter()
            .map(|(kind, block, m)| Deletion { kind, block, m })
            .collect();
        expected.sort_by_key(|d| (d.block, d.m, d.kind as usize));
        assert_eq!(d, expected);
    }
}
