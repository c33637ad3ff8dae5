//! Discretized domains: the unit interval, the unit disk on a polar grid, and
//! axis-aligned rectangles on a tensor grid.
//!
//! All three are vertex-centered finite-volume grids. Interior nodes are the
//! unknowns; boundary nodes carry the homogeneous Dirichlet value and the
//! surface quadrature. The control volumes of the outermost interior layer
//! extend to the boundary, so cell volumes sum to the exact measure of the
//! domain and surface weights sum to the exact perimeter.
//!
//! Normals point *into* the domain.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point in the plane. One-dimensional domains use the first coordinate
/// and keep the second at zero.
pub type Point = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("resolution {value} too small for {kind} (minimum 4)")]
    ResolutionTooSmall { kind: &'static str, value: usize },
    #[error("unknown domain kind `{0}`")]
    UnknownKind(String),
    #[error("invalid rectangle size {width} x {height}")]
    InvalidSize { width: f64, height: f64 },
    #[error("point ({}, {}) is not inside the domain", .0[0], .0[1])]
    OutsideDomain(Point),
    #[error("boundary node {index} does not exist (domain has {count})")]
    NotBoundaryNode { index: usize, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Interval,
    Disk,
    Rectangle,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Interval => "interval",
            DomainKind::Disk => "disk",
            DomainKind::Rectangle => "rectangle",
        }
    }
}

impl std::str::FromStr for DomainKind {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "interval" => Ok(DomainKind::Interval),
            "disk" => Ok(DomainKind::Disk),
            "rectangle" | "square" => Ok(DomainKind::Rectangle),
            other => Err(DomainError::UnknownKind(other.to_string())),
        }
    }
}

/// Shape and resolution of a discretized domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    /// The interval (0, 1) split into `n` cells.
    Interval { n: usize },
    /// The unit disk with `nr` radial and `ntheta` angular cells.
    Disk { nr: usize, ntheta: usize },
    /// The rectangle (0, width) x (0, height) with `nx` x `ny` cells.
    Rectangle {
        width: f64,
        height: f64,
        nx: usize,
        ny: usize,
    },
}

impl DomainSpec {
    pub fn interval(n: usize) -> Self {
        DomainSpec::Interval { n }
    }

    /// Unit disk with four angular cells per radial cell on the outer ring.
    pub fn disk(nr: usize) -> Self {
        DomainSpec::Disk { nr, ntheta: 4 * nr }
    }

    pub fn unit_square(n: usize) -> Self {
        DomainSpec::Rectangle {
            width: 1.0,
            height: 1.0,
            nx: n,
            ny: n,
        }
    }

    pub fn kind(&self) -> DomainKind {
        match self {
            DomainSpec::Interval { .. } => DomainKind::Interval,
            DomainSpec::Disk { .. } => DomainKind::Disk,
            DomainSpec::Rectangle { .. } => DomainKind::Rectangle,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Every resolution multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        match *self {
            DomainSpec::Interval { n } => DomainSpec::Interval { n: n * factor },
            DomainSpec::Disk { nr, ntheta } => DomainSpec::Disk {
                nr: nr * factor,
                ntheta: ntheta * factor,
            },
            DomainSpec::Rectangle {
                width,
                height,
                nx,
                ny,
            } => DomainSpec::Rectangle {
                width,
                height,
                nx: nx * factor,
                ny: ny * factor,
            },
        }
    }

    /// The leading resolution parameter (n, nr or nx).
    pub fn resolution(&self) -> usize {
        match *self {
            DomainSpec::Interval { n } => n,
            DomainSpec::Disk { nr, .. } => nr,
            DomainSpec::Rectangle { nx, .. } => nx,
        }
    }

    /// Mesh parameter: the largest grid spacing.
    pub fn mesh_size(&self) -> f64 {
        match *self {
            DomainSpec::Interval { n } => 1.0 / n as f64,
            DomainSpec::Disk { nr, ntheta } => (1.0 / nr as f64).max(2.0 * PI / ntheta as f64),
            DomainSpec::Rectangle {
                width,
                height,
                nx,
                ny,
            } => (width / nx as f64).max(height / ny as f64),
        }
    }

    /// Exact |Ω|.
    pub fn measure(&self) -> f64 {
        match *self {
            DomainSpec::Interval { .. } => 1.0,
            DomainSpec::Disk { .. } => PI,
            DomainSpec::Rectangle { width, height, .. } => width * height,
        }
    }

    /// Exact |∂Ω|; the two endpoints of the interval count with unit weight.
    pub fn perimeter(&self) -> f64 {
        match *self {
            DomainSpec::Interval { .. } => 2.0,
            DomainSpec::Disk { .. } => 2.0 * PI,
            DomainSpec::Rectangle { width, height, .. } => 2.0 * (width + height),
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let check = |kind, value: usize| {
            if value < 4 {
                Err(DomainError::ResolutionTooSmall { kind, value })
            } else {
                Ok(())
            }
        };
        match *self {
            DomainSpec::Interval { n } => check("interval", n),
            DomainSpec::Disk { nr, ntheta } => {
                check("disk", nr)?;
                check("disk", ntheta)
            }
            DomainSpec::Rectangle {
                width,
                height,
                nx,
                ny,
            } => {
                if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
                    return Err(DomainError::InvalidSize { width, height });
                }
                check("rectangle", nx)?;
                check("rectangle", ny)
            }
        }
    }

    /// Exact Euclidean distance to the boundary, or an error outside Ω.
    pub fn distance_to_boundary(&self, p: Point) -> Result<f64, DomainError> {
        let d = self.signed_distance(p);
        if d > 0.0 {
            Ok(d)
        } else {
            Err(DomainError::OutsideDomain(p))
        }
    }

    /// Positive inside, zero on ∂Ω, negative outside.
    pub(crate) fn signed_distance(&self, p: Point) -> f64 {
        match *self {
            DomainSpec::Interval { .. } => {
                if p[1] != 0.0 {
                    return -p[1].abs();
                }
                p[0].min(1.0 - p[0])
            }
            DomainSpec::Disk { .. } => 1.0 - p[0].hypot(p[1]),
            DomainSpec::Rectangle { width, height, .. } => {
                p[0].min(width - p[0]).min(p[1]).min(height - p[1])
            }
        }
    }

    /// Interior node coordinates and control volumes, without connectivity.
    pub fn quadrature(&self) -> (Vec<Point>, Vec<f64>) {
        match *self {
            DomainSpec::Interval { n } => {
                let h = 1.0 / n as f64;
                (1..n)
                    .map(|g| ([g as f64 * h, 0.0], h * edge_extent(g, n)))
                    .unzip()
            }
            DomainSpec::Disk { nr, ntheta } => {
                let dr = 1.0 / nr as f64;
                let dt = 2.0 * PI / ntheta as f64;
                let mut pts = Vec::with_capacity(1 + (nr - 1) * ntheta);
                let mut vols = Vec::with_capacity(pts.capacity());
                pts.push([0.0, 0.0]);
                vols.push(PI * (0.5 * dr).powi(2));
                for ring in 1..nr {
                    let (inner, outer) = ring_faces(ring, nr);
                    let vol = 0.5 * dt * (outer * outer - inner * inner);
                    let rho = ring as f64 * dr;
                    for j in 0..ntheta {
                        let t = j as f64 * dt;
                        pts.push([rho * t.cos(), rho * t.sin()]);
                        vols.push(vol);
                    }
                }
                (pts, vols)
            }
            DomainSpec::Rectangle {
                width,
                height,
                nx,
                ny,
            } => {
                let hx = width / nx as f64;
                let hy = height / ny as f64;
                let mut pts = Vec::with_capacity((nx - 1) * (ny - 1));
                let mut vols = Vec::with_capacity(pts.capacity());
                for j in 1..ny {
                    for i in 1..nx {
                        pts.push([i as f64 * hx, j as f64 * hy]);
                        vols.push(hx * edge_extent(i, nx) * hy * edge_extent(j, ny));
                    }
                }
                (pts, vols)
            }
        }
    }
}

/// Extent of a cell in units of the spacing: cells next to the boundary
/// absorb the boundary half-cell.
fn edge_extent(g: usize, n: usize) -> f64 {
    if g == 1 || g + 1 == n {
        1.5
    } else {
        1.0
    }
}

/// Inner and outer face radii of the control volume of ring `ring`.
fn ring_faces(ring: usize, nr: usize) -> (f64, f64) {
    let dr = 1.0 / nr as f64;
    let inner = (ring as f64 - 0.5) * dr;
    let outer = if ring + 1 == nr {
        1.0
    } else {
        (ring as f64 + 0.5) * dr
    };
    (inner, outer)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryNode {
    pub point: Point,
    /// Surface quadrature weight.
    pub weight: f64,
    /// Inward unit normal.
    pub normal: Point,
    /// Rectangle corner: the domain is not smooth here.
    pub corner: bool,
    /// Arc-length coordinate along ∂Ω (x for the interval endpoints).
    pub coordinate: f64,
}

/// A conductance between two nodes. For interior links both indices are
/// interior nodes; for boundary links `to` indexes the boundary nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub conductance: f64,
}

/// The first two interior nodes along the inward normal at a boundary node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalStencil {
    pub first: usize,
    pub second: usize,
    pub spacing: f64,
}

/// Reference to a grid point that may lie on the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridPoint {
    Interior(usize),
    Boundary,
}

/// A discretized domain. Immutable once built.
#[derive(Debug, Clone)]
pub struct Domain {
    spec: DomainSpec,
    h: f64,
    nodes: Vec<Point>,
    volumes: Vec<f64>,
    distance: Vec<f64>,
    boundary: Vec<BoundaryNode>,
    links: Vec<Link>,
    boundary_links: Vec<Link>,
    stencils: Vec<Option<NormalStencil>>,
}

impl Domain {
    pub fn build(spec: DomainSpec) -> Result<Self, DomainError> {
        spec.validate()?;
        let (nodes, volumes) = spec.quadrature();
        let distance = nodes.iter().map(|&p| spec.signed_distance(p)).collect();
        let mut domain = Domain {
            spec,
            h: spec.mesh_size(),
            nodes,
            volumes,
            distance,
            boundary: Vec::new(),
            links: Vec::new(),
            boundary_links: Vec::new(),
            stencils: Vec::new(),
        };
        match spec {
            DomainSpec::Interval { n } => domain.connect_interval(n),
            DomainSpec::Disk { nr, ntheta } => domain.connect_disk(nr, ntheta),
            DomainSpec::Rectangle {
                width,
                height,
                nx,
                ny,
            } => domain.connect_rectangle(width, height, nx, ny),
        }
        Ok(domain)
    }

    fn connect_interval(&mut self, n: usize) {
        let h = 1.0 / n as f64;
        let m = n - 1;
        self.links = (0..m - 1)
            .map(|i| Link {
                from: i,
                to: i + 1,
                conductance: 1.0 / h,
            })
            .collect();
        self.boundary = vec![
            BoundaryNode {
                point: [0.0, 0.0],
                weight: 1.0,
                normal: [1.0, 0.0],
                corner: false,
                coordinate: 0.0,
            },
            BoundaryNode {
                point: [1.0, 0.0],
                weight: 1.0,
                normal: [-1.0, 0.0],
                corner: false,
                coordinate: 1.0,
            },
        ];
        self.boundary_links = vec![
            Link {
                from: 0,
                to: 0,
                conductance: 1.0 / h,
            },
            Link {
                from: m - 1,
                to: 1,
                conductance: 1.0 / h,
            },
        ];
        self.stencils = vec![
            Some(NormalStencil {
                first: 0,
                second: 1,
                spacing: h,
            }),
            Some(NormalStencil {
                first: m - 1,
                second: m - 2,
                spacing: h,
            }),
        ];
    }

    fn connect_disk(&mut self, nr: usize, nt: usize) {
        let dr = 1.0 / nr as f64;
        let dt = 2.0 * PI / nt as f64;
        let idx = |ring: usize, j: usize| disk_index(ring, j % nt, nt);
        for j in 0..nt {
            self.links.push(Link {
                from: 0,
                to: idx(1, j),
                conductance: 0.5 * dt,
            });
        }
        for ring in 1..nr {
            let (inner, outer) = ring_faces(ring, nr);
            let rho = ring as f64 * dr;
            for j in 0..nt {
                self.links.push(Link {
                    from: idx(ring, j),
                    to: idx(ring, j + 1),
                    conductance: (outer - inner) / (rho * dt),
                });
                if ring + 1 < nr {
                    self.links.push(Link {
                        from: idx(ring, j),
                        to: idx(ring + 1, j),
                        conductance: outer * dt / dr,
                    });
                }
            }
        }
        for j in 0..nt {
            let t = j as f64 * dt;
            let (s, c) = t.sin_cos();
            self.boundary.push(BoundaryNode {
                point: [c, s],
                weight: dt,
                normal: [-c, -s],
                corner: false,
                coordinate: t,
            });
            self.boundary_links.push(Link {
                from: idx(nr - 1, j),
                to: j,
                conductance: dt / dr,
            });
            self.stencils.push(Some(NormalStencil {
                first: idx(nr - 1, j),
                second: if nr > 2 { idx(nr - 2, j) } else { 0 },
                spacing: dr,
            }));
        }
    }

    fn connect_rectangle(&mut self, width: f64, height: f64, nx: usize, ny: usize) {
        let hx = width / nx as f64;
        let hy = height / ny as f64;
        let idx = |i: usize, j: usize| (j - 1) * (nx - 1) + (i - 1);
        let xext = |i: usize| hx * edge_extent(i, nx);
        let yext = |j: usize| hy * edge_extent(j, ny);
        for j in 1..ny {
            for i in 1..nx {
                if i + 1 < nx {
                    self.links.push(Link {
                        from: idx(i, j),
                        to: idx(i + 1, j),
                        conductance: yext(j) / hx,
                    });
                }
                if j + 1 < ny {
                    self.links.push(Link {
                        from: idx(i, j),
                        to: idx(i, j + 1),
                        conductance: xext(i) / hy,
                    });
                }
            }
        }

        // Counterclockwise from the origin: bottom, right, top, left.
        let corner_weight = 0.5 * (hx + hy);
        let diag = |dx: f64, dy: f64| {
            let n = dx.hypot(dy);
            [dx / n, dy / n]
        };
        let push_corner = |this: &mut Self, point: Point, normal: Point, coordinate: f64| {
            this.boundary.push(BoundaryNode {
                point,
                weight: corner_weight,
                normal,
                corner: true,
                coordinate,
            });
            this.stencils.push(None);
        };
        let side = |this: &mut Self,
                        point: Point,
                        normal: Point,
                        weight: f64,
                        coordinate: f64,
                        first: (usize, usize),
                        second: (usize, usize),
                        conductance: f64,
                        spacing: f64| {
            let b = this.boundary.len();
            this.boundary.push(BoundaryNode {
                point,
                weight,
                normal,
                corner: false,
                coordinate,
            });
            this.boundary_links.push(Link {
                from: idx(first.0, first.1),
                to: b,
                conductance,
            });
            this.stencils.push(Some(NormalStencil {
                first: idx(first.0, first.1),
                second: idx(second.0, second.1),
                spacing,
            }));
        };

        push_corner(self, [0.0, 0.0], diag(hx, hy), 0.0);
        for i in 1..nx {
            let x = i as f64 * hx;
            side(self, [x, 0.0], [0.0, 1.0], hx, x, (i, 1), (i, 2), xext(i) / hy, hy);
        }
        push_corner(self, [width, 0.0], diag(-hx, hy), width);
        for j in 1..ny {
            let y = j as f64 * hy;
            side(
                self,
                [width, y],
                [-1.0, 0.0],
                hy,
                width + y,
                (nx - 1, j),
                (nx - 2, j),
                yext(j) / hx,
                hx,
            );
        }
        push_corner(self, [width, height], diag(-hx, -hy), width + height);
        for i in (1..nx).rev() {
            let x = i as f64 * hx;
            side(
                self,
                [x, height],
                [0.0, -1.0],
                hx,
                2.0 * width + height - x,
                (i, ny - 1),
                (i, ny - 2),
                xext(i) / hy,
                hy,
            );
        }
        push_corner(self, [0.0, height], diag(hx, -hy), 2.0 * width + height);
        for j in (1..ny).rev() {
            let y = j as f64 * hy;
            side(
                self,
                [0.0, y],
                [1.0, 0.0],
                hy,
                2.0 * (width + height) - y,
                (1, j),
                (2, j),
                yext(j) / hx,
                hx,
            );
        }
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn kind(&self) -> DomainKind {
        self.spec.kind()
    }

    /// Mesh parameter h.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// d_∂Ω at every interior node.
    pub fn distances(&self) -> &[f64] {
        &self.distance
    }

    pub fn boundary(&self) -> &[BoundaryNode] {
        &self.boundary
    }

    pub fn boundary_len(&self) -> usize {
        self.boundary.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn boundary_links(&self) -> &[Link] {
        &self.boundary_links
    }

    pub fn normal_stencil(&self, b: usize) -> Result<Option<NormalStencil>, DomainError> {
        self.check_boundary(b)?;
        Ok(self.stencils[b])
    }

    fn check_boundary(&self, b: usize) -> Result<(), DomainError> {
        if b < self.boundary.len() {
            Ok(())
        } else {
            Err(DomainError::NotBoundaryNode {
                index: b,
                count: self.boundary.len(),
            })
        }
    }

    pub fn distance_to_boundary(&self, p: Point) -> Result<f64, DomainError> {
        self.spec.distance_to_boundary(p)
    }

    pub fn inward_normal(&self, b: usize) -> Result<Point, DomainError> {
        self.check_boundary(b)?;
        Ok(self.boundary[b].normal)
    }

    /// Index of the boundary node closest to `p`.
    pub fn nearest_boundary_node(&self, p: Point) -> usize {
        let dist = |q: &Point| (q[0] - p[0]).hypot(q[1] - p[1]);
        self.boundary
            .iter()
            .enumerate()
            .min_by(|a, b| dist(&a.1.point).total_cmp(&dist(&b.1.point)))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Index of the interior node closest to `p`.
    pub fn nearest_node(&self, p: Point) -> usize {
        let dist = |q: &Point| (q[0] - p[0]).hypot(q[1] - p[1]);
        self.nodes
            .iter()
            .enumerate()
            .min_by(|a, b| dist(a.1).total_cmp(&dist(b.1)))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Non-corner boundary nodes, the ones where pointwise boundary
    /// statements are asserted.
    pub fn smooth_boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.boundary
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.corner)
            .map(|(i, _)| i)
    }

    /// Multilinear weights of the grid cell containing `p`. Entries that
    /// fall on ∂Ω are reported as [`GridPoint::Boundary`].
    pub fn cell_weights(&self, p: Point) -> Result<Vec<(GridPoint, f64)>, DomainError> {
        if self.spec.signed_distance(p) <= 0.0 {
            return Err(DomainError::OutsideDomain(p));
        }
        let mut out = Vec::with_capacity(4);
        match self.spec {
            DomainSpec::Interval { n } => {
                let (g, t) = split(p[0] * n as f64, n);
                out.push((interval_point(g, n), 1.0 - t));
                out.push((interval_point(g + 1, n), t));
            }
            DomainSpec::Disk { nr, ntheta } => {
                let r = p[0].hypot(p[1]);
                let (g, t) = split(r * nr as f64, nr);
                let mut angle = p[1].atan2(p[0]);
                if angle < 0.0 {
                    angle += 2.0 * PI;
                }
                let u = angle / (2.0 * PI) * ntheta as f64;
                let j = (u.floor() as usize) % ntheta;
                let tau = u - u.floor();
                let j1 = (j + 1) % ntheta;
                let ring = |ring: usize, j: usize| {
                    if ring >= nr {
                        GridPoint::Boundary
                    } else {
                        GridPoint::Interior(disk_index(ring, j, ntheta))
                    }
                };
                if g == 0 {
                    out.push((GridPoint::Interior(0), 1.0 - t));
                } else {
                    out.push((ring(g, j), (1.0 - t) * (1.0 - tau)));
                    out.push((ring(g, j1), (1.0 - t) * tau));
                }
                out.push((ring(g + 1, j), t * (1.0 - tau)));
                out.push((ring(g + 1, j1), t * tau));
            }
            DomainSpec::Rectangle {
                width,
                height,
                nx,
                ny,
            } => {
                let (gi, tx) = split(p[0] / width * nx as f64, nx);
                let (gj, ty) = split(p[1] / height * ny as f64, ny);
                let at = |i: usize, j: usize| {
                    if i == 0 || j == 0 || i >= nx || j >= ny {
                        GridPoint::Boundary
                    } else {
                        GridPoint::Interior((j - 1) * (nx - 1) + (i - 1))
                    }
                };
                out.push((at(gi, gj), (1.0 - tx) * (1.0 - ty)));
                out.push((at(gi + 1, gj), tx * (1.0 - ty)));
                out.push((at(gi, gj + 1), (1.0 - tx) * ty));
                out.push((at(gi + 1, gj + 1), tx * ty));
            }
        }
        out.retain(|&(_, w)| w != 0.0);
        Ok(out)
    }

    /// Deposition weights: the multilinear weights restricted to interior
    /// nodes and renormalized to sum to one.
    pub fn deposit_weights(&self, p: Point) -> Result<Vec<(usize, f64)>, DomainError> {
        let cell = self.cell_weights(p)?;
        let mut out: Vec<(usize, f64)> = cell
            .into_iter()
            .filter_map(|(g, w)| match g {
                GridPoint::Interior(i) => Some((i, w)),
                GridPoint::Boundary => None,
            })
            .collect();
        let total: f64 = out.iter().map(|&(_, w)| w).sum();
        if total <= 0.0 {
            // Only possible for a point infinitesimally close to the boundary.
            let i = self.nearest_node(p);
            return Ok(vec![(i, 1.0)]);
        }
        for (_, w) in &mut out {
            *w /= total;
        }
        Ok(out)
    }

    /// Piecewise multilinear interpolant of interior values, zero on ∂Ω.
    pub fn interpolate(&self, values: &[f64], p: Point) -> Result<f64, DomainError> {
        Ok(self
            .cell_weights(p)?
            .into_iter()
            .map(|(g, w)| match g {
                GridPoint::Interior(i) => w * values[i],
                GridPoint::Boundary => 0.0,
            })
            .sum())
    }

    /// Polar-grid position (ring, angle) of an interior disk node.
    pub fn disk_position(&self, node: usize) -> Option<(usize, usize)> {
        match self.spec {
            DomainSpec::Disk { ntheta, .. } => {
                if node == 0 {
                    Some((0, 0))
                } else {
                    Some((1 + (node - 1) / ntheta, (node - 1) % ntheta))
                }
            }
            _ => None,
        }
    }

    /// Polar-grid index of (ring, angle), ring ≥ 1.
    pub fn disk_node(&self, ring: usize, j: usize) -> Option<usize> {
        match self.spec {
            DomainSpec::Disk { nr, ntheta } if ring >= 1 && ring < nr => {
                Some(disk_index(ring, j % ntheta, ntheta))
            }
            _ => None,
        }
    }
}

fn disk_index(ring: usize, j: usize, ntheta: usize) -> usize {
    1 + (ring - 1) * ntheta + j
}

fn interval_point(g: usize, n: usize) -> GridPoint {
    if g == 0 || g >= n {
        GridPoint::Boundary
    } else {
        GridPoint::Interior(g - 1)
    }
}

/// Split a grid coordinate into a cell index in [0, n) and a local offset.
fn split(s: f64, n: usize) -> (usize, f64) {
    let g = (s.floor().max(0.0) as usize).min(n - 1);
    (g, (s - g as f64).clamp(0.0, 1.0))
}
