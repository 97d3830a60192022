//! Foot shapes, submerged-surface tessellation and per-plate contact kinematics.
//!
//! World frame: `z` points up and the undisturbed mud surface is `z = 0`.
//! A foot at depth `z` has its lowest point at world height `-z`.
//!
//! Orientation of the canonical feet:
//! * `Flat { length, width }` — `length` spans the lateral `y` axis and
//!   `width` the longitudinal `x` axis; the sole faces `-z`.
//! * `SemiCylinder { radius, width }` — the cylinder axis runs along `x`
//!   over `width`; the curved sole lies in the `y`–`z` plane.
//! * `SemiSphere { radius }` — a hemisphere, pole down.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use nalgebra::{Vector2, Vector3};

use crate::error::{MudError, Result};

pub type Vec3 = Vector3<f64>;

/// Key of a variable-area schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKey {
    Depth,
    Time,
}

/// Effective area of a morphing foot as a function of depth, time or phase.
#[derive(Debug, Clone, PartialEq)]
pub enum AreaSchedule {
    /// Piecewise-linear `(key, area)` knots, clamped outside the knot range.
    Table {
        key: ScheduleKey,
        knots: Vec<(f64, f64)>,
    },
    /// One area while pushing in (and dwelling), another while pulling out.
    Phase { intrusion: f64, retraction: f64 },
}

impl AreaSchedule {
    pub fn table(key: ScheduleKey, mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(MudError::Geometry("area schedule needs at least one knot".into()));
        }
        if knots.iter().any(|&(k, a)| !k.is_finite() || !(a >= 0.0) || !a.is_finite()) {
            return Err(MudError::Geometry(
                "area schedule knots must be finite with nonnegative area".into(),
            ));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(AreaSchedule::Table { key, knots })
    }

    pub fn phase(intrusion: f64, retraction: f64) -> Result<Self> {
        if !(intrusion >= 0.0 && retraction >= 0.0) {
            return Err(MudError::Geometry("schedule areas must be nonnegative".into()));
        }
        Ok(AreaSchedule::Phase {
            intrusion,
            retraction,
        })
    }

    pub fn area(&self, depth: f64, time: f64, retracting: bool) -> f64 {
        match self {
            AreaSchedule::Table { key, knots } => {
                let x = match key {
                    ScheduleKey::Depth => depth,
                    ScheduleKey::Time => time,
                };
                interpolate(knots, x)
            }
            AreaSchedule::Phase {
                intrusion,
                retraction,
            } => {
                if retracting {
                    *retraction
                } else {
                    *intrusion
                }
            }
        }
    }

    /// Largest area the schedule can take.
    pub fn max_area(&self) -> f64 {
        match self {
            AreaSchedule::Table { knots, .. } => knots.iter().map(|k| k.1).fold(0.0, f64::max),
            AreaSchedule::Phase {
                intrusion,
                retraction,
            } => intrusion.max(*retraction),
        }
    }
}

fn interpolate(knots: &[(f64, f64)], x: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = knots.partition_point(|k| k.0 <= x);
    let (x0, y0) = knots[i - 1];
    let (x1, y1) = knots[i];
    if x1 == x0 {
        return y1;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Closed triangle surface in the foot frame (counter-clockwise = outward).
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub triangles: Vec<[Vec3; 3]>,
}

impl TriangleMesh {
    /// Parses 9 whitespace-separated floats per line (three vertices, metres).
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut triangles = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| {
                MudError::Geometry(format!("line {}: {e}", lineno + 1))
            })?;
            if vals.len() != 9 {
                return Err(MudError::Geometry(format!(
                    "line {}: expected 9 values, found {}",
                    lineno + 1,
                    vals.len()
                )));
            }
            let v = |i: usize| Vec3::new(vals[3 * i], vals[3 * i + 1], vals[3 * i + 2]);
            let tri = [v(0), v(1), v(2)];
            if (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).norm() == 0.0 {
                return Err(MudError::Geometry(format!(
                    "line {}: degenerate triangle",
                    lineno + 1
                )));
            }
            triangles.push(tri);
        }
        if triangles.is_empty() {
            return Err(MudError::Geometry("mesh file contains no triangles".into()));
        }
        Ok(TriangleMesh { triangles })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn lowest(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| t.iter().map(|v| v.z))
            .fold(f64::INFINITY, f64::min)
    }

    fn extent(&self, axis: usize) -> f64 {
        let (lo, hi) = self
            .triangles
            .iter()
            .flat_map(|t| t.iter().map(move |v| v[axis]))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        hi - lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FootShape {
    Flat { length: f64, width: f64 },
    SemiCylinder { radius: f64, width: f64 },
    SemiSphere { radius: f64 },
    VariableAreaFlat(AreaSchedule),
    Mesh(TriangleMesh),
}

impl FootShape {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(MudError::Geometry(format!("{name} must be > 0, got {v}")))
            }
        };
        match self {
            FootShape::Flat { length, width } => {
                pos("length", *length)?;
                pos("width", *width)
            }
            FootShape::SemiCylinder { radius, width } => {
                pos("radius", *radius)?;
                pos("width", *width)
            }
            FootShape::SemiSphere { radius } => pos("radius", *radius),
            FootShape::VariableAreaFlat(s) => pos("maximum scheduled area", s.max_area()),
            FootShape::Mesh(m) => {
                if m.triangles.is_empty() {
                    Err(MudError::Geometry("empty mesh".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Smallest horizontal extent, the default characteristic length.
    pub fn characteristic_length(&self) -> f64 {
        match self {
            FootShape::Flat { length, width } => length.min(*width),
            FootShape::SemiCylinder { width, .. } => *width,
            FootShape::SemiSphere { radius } => 2.0 * radius,
            FootShape::VariableAreaFlat(s) => s.max_area().sqrt(),
            FootShape::Mesh(m) => m.extent(0).min(m.extent(1)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FootShape::Flat { .. } => "flat",
            FootShape::SemiCylinder { .. } => "semi-cylinder",
            FootShape::SemiSphere { .. } => "semi-sphere",
            FootShape::VariableAreaFlat(_) => "variable-area",
            FootShape::Mesh(_) => "mesh",
        }
    }
}

/// One flat surface element of a submerged foot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    pub centroid: Vec3,
    /// Outward unit normal.
    pub normal: Vec3,
    pub area: f64,
    /// Depth of the centroid below the surface.
    pub depth: f64,
}

impl Facet {
    /// Facet of a triangle; the normal is flipped if needed to point away from `inside`.
    fn from_triangle(a: Vec3, b: Vec3, c: Vec3, inside: Option<Vec3>) -> Option<Facet> {
        let cr = (b - a).cross(&(c - a));
        let twice = cr.norm();
        if twice <= 0.0 {
            return None;
        }
        let centroid = (a + b + c) / 3.0;
        let mut normal = cr / twice;
        if let Some(p) = inside {
            if normal.dot(&(centroid - p)) < 0.0 {
                normal = -normal;
            }
        }
        Some(Facet {
            centroid,
            normal,
            area: 0.5 * twice,
            depth: (-centroid.z).max(0.0),
        })
    }
}

/// `theta_c = acos(1 - z/R)`, clamped to `pi/2` for `z > R`.
pub fn contact_angle(z: f64, radius: f64) -> Result<f64> {
    if z < 0.0 || z.is_nan() {
        return Err(MudError::Domain(format!("depth must be >= 0, got {z}")));
    }
    if z >= radius {
        return Ok(FRAC_PI_2);
    }
    // 2 asin(sqrt(z / 2R)) is acos(1 - z/R) without the cancellation at small z
    Ok(2.0 * (z / (2.0 * radius)).sqrt().asin())
}

/// `(sin theta_c, cos theta_c)` computed directly from the depth.
pub(crate) fn contact_sin_cos(z: f64, radius: f64) -> (f64, f64) {
    let r = (z / radius).min(1.0);
    ((r * (2.0 - r)).sqrt(), 1.0 - r)
}

/// Vertical projection of the submerged surface.
pub fn effective_area(shape: &FootShape, z: f64) -> f64 {
    effective_area_at(shape, z, 0.0, false)
}

/// As [`effective_area`], with the time and phase a morphing schedule may need.
pub fn effective_area_at(shape: &FootShape, z: f64, time: f64, retracting: bool) -> f64 {
    let z = z.max(0.0);
    match shape {
        FootShape::Flat { length, width } => length * width,
        FootShape::SemiCylinder { radius, width } => {
            let (s, _) = contact_sin_cos(z, *radius);
            2.0 * radius * width * s
        }
        FootShape::SemiSphere { radius } => {
            let (s, _) = contact_sin_cos(z, *radius);
            PI * radius * radius * s * s
        }
        FootShape::VariableAreaFlat(schedule) => schedule.area(z, time, retracting),
        FootShape::Mesh(mesh) => mesh_facets_clipped(mesh, z)
            .iter()
            .map(|f| f.area * (-f.normal.z).max(0.0))
            .sum(),
    }
}

/// Total analytic area of the submerged surface (used by convergence checks).
pub fn submerged_area(shape: &FootShape, z: f64) -> Result<f64> {
    let z = z.max(0.0);
    match shape {
        FootShape::Flat { length, width } => Ok(length * width + 2.0 * (length + width) * z),
        FootShape::SemiCylinder { radius, width } => {
            let theta = contact_angle(z, *radius)?;
            let (s, c) = contact_sin_cos(z, *radius);
            Ok(2.0 * theta * radius * width + 2.0 * radius * radius * (theta - s * c))
        }
        FootShape::SemiSphere { radius } => {
            Ok(2.0 * PI * radius * radius.min(z))
        }
        FootShape::VariableAreaFlat(_) => Err(MudError::Geometry(
            "a variable-area foot has no surface to mesh".into(),
        )),
        FootShape::Mesh(mesh) => Ok(mesh_facets_clipped(mesh, z).iter().map(|f| f.area).sum()),
    }
}

/// Tessellates the submerged part of the foot at depth `z` into roughly
/// `resolution` flat facets (user meshes are clipped and keep their own density).
pub fn mesh_submerged(shape: &FootShape, z: f64, resolution: usize) -> Result<Vec<Facet>> {
    if resolution < 8 {
        return Err(MudError::Geometry(format!(
            "mesh resolution must be >= 8, got {resolution}"
        )));
    }
    if z < 0.0 || z.is_nan() {
        return Err(MudError::Domain(format!("depth must be >= 0, got {z}")));
    }
    shape.validate()?;
    match shape {
        FootShape::Flat { length, width } => Ok(mesh_flat(*length, *width, z, resolution)),
        FootShape::SemiCylinder { radius, width } => {
            Ok(mesh_cylinder(*radius, *width, z, resolution))
        }
        FootShape::SemiSphere { radius } => Ok(mesh_sphere(*radius, z, resolution)),
        FootShape::VariableAreaFlat(_) => Err(MudError::Geometry(
            "a variable-area foot has no surface to mesh".into(),
        )),
        FootShape::Mesh(mesh) => Ok(mesh_facets_clipped(mesh, z)),
    }
}

fn push_quad(out: &mut Vec<Facet>, q: [Vec3; 4], inside: Option<Vec3>) {
    out.extend(Facet::from_triangle(q[0], q[1], q[2], inside));
    out.extend(Facet::from_triangle(q[0], q[2], q[3], inside));
}

fn mesh_flat(length: f64, width: f64, z: f64, resolution: usize) -> Vec<Facet> {
    let mut out = Vec::with_capacity(resolution + 8);
    let bottom = if z > 0.0 { resolution / 2 } else { resolution };
    // bottom: nx cells along x (width), ny along y (length), two triangles each
    let cells = (bottom / 2).max(1) as f64;
    let nx = ((cells * width / length).sqrt().round() as usize).max(1);
    let ny = ((cells / nx as f64).round() as usize).max(1);
    let (hx, hy) = (0.5 * width, 0.5 * length);
    let zb = -z;
    for i in 0..nx {
        for j in 0..ny {
            let x0 = -hx + width * i as f64 / nx as f64;
            let x1 = -hx + width * (i + 1) as f64 / nx as f64;
            let y0 = -hy + length * j as f64 / ny as f64;
            let y1 = -hy + length * (j + 1) as f64 / ny as f64;
            // clockwise seen from above so the normal points down
            push_quad(
                &mut out,
                [
                    Vec3::new(x0, y0, zb),
                    Vec3::new(x0, y1, zb),
                    Vec3::new(x1, y1, zb),
                    Vec3::new(x1, y0, zb),
                ],
                None,
            );
        }
    }
    if z > 0.0 {
        let per_side = ((resolution - bottom) / 8).max(1);
        let centre = Vec3::new(0.0, 0.0, zb + 1.0);
        // faces at x = ±W/2 span the length; faces at y = ±L/2 span the width
        for sx in [-1.0, 1.0] {
            strip(&mut out, per_side, centre, |u, v| {
                Vec3::new(sx * hx, -hy + length * u, zb + z * v)
            });
        }
        for sy in [-1.0, 1.0] {
            strip(&mut out, per_side, centre, |u, v| {
                Vec3::new(-hx + width * u, sy * hy, zb + z * v)
            });
        }
    }
    out
}

fn strip(out: &mut Vec<Facet>, cells: usize, inside: Vec3, at: impl Fn(f64, f64) -> Vec3) {
    for k in 0..cells {
        let u0 = k as f64 / cells as f64;
        let u1 = (k + 1) as f64 / cells as f64;
        push_quad(out, [at(u0, 0.0), at(u1, 0.0), at(u1, 1.0), at(u0, 1.0)], Some(inside));
    }
}

fn mesh_cylinder(radius: f64, width: f64, z: f64, resolution: usize) -> Vec<Facet> {
    let theta_c = contact_angle(z, radius).unwrap_or(FRAC_PI_2);
    if theta_c == 0.0 {
        return Vec::new();
    }
    let zc = radius - z.min(radius);
    let arc = 2.0 * radius * theta_c;
    // 2·nt·nx arc triangles + 2·nt cap triangles ≈ resolution
    let nt = ((resolution as f64 * arc / (2.0 * width)).sqrt().round() as usize).max(2);
    let nx = ((resolution as f64 / (2.0 * nt as f64) - 1.0).round() as usize).max(1);
    let point = |theta: f64, x: f64| Vec3::new(x, radius * theta.sin(), zc - radius * theta.cos());
    let mut out = Vec::with_capacity(2 * nt * nx + 2 * nt);
    let hx = 0.5 * width;
    for i in 0..nt {
        let t0 = -theta_c + 2.0 * theta_c * i as f64 / nt as f64;
        let t1 = -theta_c + 2.0 * theta_c * (i + 1) as f64 / nt as f64;
        for j in 0..nx {
            let x0 = -hx + width * j as f64 / nx as f64;
            let x1 = -hx + width * (j + 1) as f64 / nx as f64;
            let axis = Vec3::new(0.5 * (x0 + x1), 0.0, zc);
            push_quad(
                &mut out,
                [point(t0, x0), point(t1, x0), point(t1, x1), point(t0, x1)],
                Some(axis),
            );
        }
    }
    // end caps: circular segments fanned from the chord midpoint
    for sx in [-1.0, 1.0] {
        let x = sx * hx;
        let hub = Vec3::new(x, 0.0, zc - radius * theta_c.cos());
        let inside = Vec3::new(0.0, 0.0, zc);
        for i in 0..nt {
            let t0 = -theta_c + 2.0 * theta_c * i as f64 / nt as f64;
            let t1 = -theta_c + 2.0 * theta_c * (i + 1) as f64 / nt as f64;
            out.extend(Facet::from_triangle(hub, point(t0, x), point(t1, x), Some(inside)));
        }
    }
    out
}

fn mesh_sphere(radius: f64, z: f64, resolution: usize) -> Vec<Facet> {
    let theta_c = contact_angle(z, radius).unwrap_or(FRAC_PI_2);
    if theta_c == 0.0 {
        return Vec::new();
    }
    let zc = radius - z.min(radius);
    let centre = Vec3::new(0.0, 0.0, zc);
    // keep cells roughly square: azimuthal count / ring count ≈ 2π sinθ_c / θ_c
    let ratio = (2.0 * PI * theta_c.sin() / theta_c).clamp(4.0, 2.0 * PI);
    let nt = ((resolution as f64 / (2.0 * ratio)).sqrt().round() as usize).max(1);
    let np = ((ratio * nt as f64).round() as usize).max(4);
    let point = |theta: f64, phi: f64| {
        centre
            + radius * Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), -theta.cos())
    };
    let pole = point(0.0, 0.0);
    let mut out = Vec::with_capacity(np * (2 * nt));
    for i in 0..nt {
        let t0 = theta_c * i as f64 / nt as f64;
        let t1 = theta_c * (i + 1) as f64 / nt as f64;
        for j in 0..np {
            let p0 = 2.0 * PI * j as f64 / np as f64;
            let p1 = 2.0 * PI * (j + 1) as f64 / np as f64;
            if i == 0 {
                out.extend(Facet::from_triangle(pole, point(t1, p0), point(t1, p1), Some(centre)));
            } else {
                push_quad(
                    &mut out,
                    [point(t0, p0), point(t1, p0), point(t1, p1), point(t0, p1)],
                    Some(centre),
                );
            }
        }
    }
    out
}

/// Places the mesh with its lowest vertex at depth `z` and keeps the part below the surface.
fn mesh_facets_clipped(mesh: &TriangleMesh, z: f64) -> Vec<Facet> {
    let shift = -z - mesh.lowest();
    let mut out = Vec::with_capacity(mesh.triangles.len());
    for tri in &mesh.triangles {
        let v: Vec<Vec3> = tri.iter().map(|p| p + Vec3::new(0.0, 0.0, shift)).collect();
        let poly = clip_below_surface(&v);
        if poly.len() < 3 {
            continue;
        }
        let normal = (v[1] - v[0]).cross(&(v[2] - v[0])).normalize();
        for k in 1..poly.len() - 1 {
            if let Some(mut f) = Facet::from_triangle(poly[0], poly[k], poly[k + 1], None) {
                // keep the original winding's orientation for slivers
                f.normal = normal;
                out.push(f);
            }
        }
    }
    out
}

fn clip_below_surface(poly: &[Vec3]) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(4);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let a_in = a.z <= 0.0;
        let b_in = b.z <= 0.0;
        if a_in {
            out.push(a);
        }
        if a_in != b_in {
            let t = a.z / (a.z - b.z);
            let mut p = a + (b - a) * t;
            p.z = 0.0;
            out.push(p);
        }
    }
    out
}

/// Local plate frame and contact angles of one facet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateKinematics {
    /// Angle between the normal and the vertical motion direction, in `[0, pi]`.
    pub psi1: f64,
    /// Signed angle from the horizontal normal `e2` to the horizontal velocity, in `[-pi, pi]`.
    pub psi2: f64,
    /// Heading of the horizontal normal from the `x` axis.
    pub varphi: f64,
    pub e1: Vec3,
    pub e2: Vec3,
    pub e3: Vec3,
    /// Normal is vertical (the cross-product frame is undefined) or the foot is at rest.
    pub degenerate: bool,
}

/// Wraps an angle into `[-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI && a > 0.0 {
        PI
    } else {
        w
    }
}

/// Heading of a horizontal velocity, `0` when it vanishes.
pub fn heading(u_h: &Vector2<f64>) -> f64 {
    if u_h.x == 0.0 && u_h.y == 0.0 {
        0.0
    } else {
        u_h.y.atan2(u_h.x)
    }
}

pub fn plate_angles(facet: &Facet, u_h: &Vector2<f64>, u_z: f64) -> PlateKinematics {
    let n = facet.normal;
    let e3 = Vec3::z();
    let motion = if u_z > 0.0 { e3 } else { -e3 };
    let psi1 = n.dot(&motion).clamp(-1.0, 1.0).acos();
    let at_rest = u_h.norm() == 0.0 && u_z == 0.0;
    let cross = n.cross(&e3);
    let (e1, e2, degenerate) = if cross.norm() < 1e-12 {
        let h = if u_h.norm() > 0.0 {
            u_h.normalize()
        } else {
            Vector2::x()
        };
        let e2 = Vec3::new(h.x, h.y, 0.0);
        (e2.cross(&e3), e2, true)
    } else {
        let e1 = cross.normalize();
        (e1, e3.cross(&e1), false)
    };
    let varphi = e2.y.atan2(e2.x);
    PlateKinematics {
        psi1,
        psi2: wrap_angle(heading(u_h) - varphi),
        varphi,
        e1,
        e2,
        e3,
        degenerate: degenerate || at_rest,
    }
}

/// Normal scaling factor `½(1 + cos 2ψ)`, negated for `|ψ| > π/2`.
pub fn scale_normal(psi: f64) -> f64 {
    let f = 0.5 * (1.0 + (2.0 * psi).cos());
    if psi.abs() > FRAC_PI_2 {
        -f
    } else {
        f
    }
}

/// Tangential scaling factor `½(1 - cos 2ψ)`, negated for `ψ < 0`.
pub fn scale_tangential(psi: f64) -> f64 {
    let f = 0.5 * (1.0 - (2.0 * psi).cos());
    if psi < 0.0 {
        -f
    } else {
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const R: f64 = 0.045;

    #[test]
    fn contact_angle_values() {
        assert_eq!(contact_angle(0.0, R).unwrap(), 0.0);
        assert_relative_eq!(contact_angle(R, R).unwrap(), FRAC_PI_2);
        assert_relative_eq!(contact_angle(R / 2.0, R).unwrap(), PI / 3.0, max_relative = 1e-14);
        assert_relative_eq!(contact_angle(2.0 * R, R).unwrap(), FRAC_PI_2);
        assert!(matches!(contact_angle(-1e-3, R), Err(MudError::Domain(_))));
        for z in [1e-9, 1e-5, 0.01, 0.03] {
            assert_relative_eq!(
                contact_angle(z, R).unwrap(),
                (1.0 - z / R).acos(),
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn effective_area_values() {
        let flat = FootShape::Flat { length: 0.08, width: 0.065 };
        assert_relative_eq!(effective_area(&flat, 0.01), 0.0052, max_relative = 1e-12);
        let sphere = FootShape::SemiSphere { radius: R };
        assert_relative_eq!(effective_area(&sphere, R), 6.3617e-3, max_relative = 1e-4);
        assert_eq!(effective_area(&sphere, 0.0), 0.0);
        let cyl = FootShape::SemiCylinder { radius: R, width: 0.065 };
        assert_eq!(effective_area(&cyl, 0.0), 0.0);
        assert_relative_eq!(effective_area(&cyl, 2.0 * R), 2.0 * R * 0.065);
    }

    #[test]
    fn effective_area_is_continuous_and_monotone() {
        for shape in [
            FootShape::SemiSphere { radius: R },
            FootShape::SemiCylinder { radius: R, width: 0.065 },
        ] {
            let mut prev = 0.0;
            for k in 0..=2000 {
                let z = 1.2 * R * k as f64 / 2000.0;
                let a = effective_area(&shape, z);
                assert!(a >= prev);
                prev = a;
            }
            let below = effective_area(&shape, R * (1.0 - 1e-9));
            let above = effective_area(&shape, R * (1.0 + 1e-9));
            assert_relative_eq!(below, above, max_relative = 1e-6);
        }
    }

    #[test]
    fn schedules() {
        let s = AreaSchedule::table(ScheduleKey::Depth, vec![(0.02, 2.0), (0.0, 1.0)]).unwrap();
        assert_eq!(s.area(-1.0, 0.0, false), 1.0);
        assert_eq!(s.area(0.01, 0.0, false), 1.5);
        assert_eq!(s.area(0.05, 0.0, true), 2.0);
        let p = AreaSchedule::phase(1.0, 0.4).unwrap();
        assert_eq!(p.area(0.0, 0.0, true), 0.4);
        assert!(AreaSchedule::table(ScheduleKey::Time, vec![(0.0, -1.0)]).is_err());
        let shape = FootShape::VariableAreaFlat(p);
        assert!(mesh_submerged(&shape, 0.01, 100).is_err());
    }

    fn total(f: &[Facet]) -> f64 {
        f.iter().map(|f| f.area).sum()
    }

    #[test]
    fn hemisphere_area() {
        let f = mesh_submerged(&FootShape::SemiSphere { radius: R }, R, 10_000).unwrap();
        let exact = 2.0 * PI * R * R;
        assert!((total(&f) - exact).abs() / exact < 5e-3);
        assert!(f.iter().all(|f| (f.normal.norm() - 1.0).abs() < 1e-12 && f.area > 0.0));
    }

    #[test]
    fn flat_mesh_structure() {
        let (l, w, z) = (0.08, 0.065, 0.02);
        let f = mesh_submerged(&FootShape::Flat { length: l, width: w }, z, 1000).unwrap();
        let bottom: f64 = f.iter().filter(|f| f.normal.z < -0.5).map(|f| f.area).sum();
        assert_relative_eq!(bottom, l * w, max_relative = 1e-12);
        let sx: f64 = f.iter().filter(|f| f.normal.x.abs() > 0.5).map(|f| f.area).sum();
        let sy: f64 = f.iter().filter(|f| f.normal.y.abs() > 0.5).map(|f| f.area).sum();
        assert_relative_eq!(sx, 2.0 * l * z, max_relative = 1e-12);
        assert_relative_eq!(sy, 2.0 * w * z, max_relative = 1e-12);
        // side normals point outward
        assert!(f
            .iter()
            .filter(|f| f.normal.x.abs() > 0.5)
            .all(|f| f.normal.x * f.centroid.x > 0.0));
    }

    #[test]
    fn cylinder_area_at_half_radius() {
        let w = 0.065;
        let f = mesh_submerged(&FootShape::SemiCylinder { radius: R, width: w }, R / 2.0, 10_000)
            .unwrap();
        let t = PI / 3.0;
        let segment = 0.5 * R * R * (2.0 * t - (2.0 * t).sin());
        let exact = 2.0 * t * R * w + 2.0 * segment;
        assert!((total(&f) - exact).abs() / exact < 5e-3, "{} {}", total(&f), exact);
    }

    #[test]
    fn area_converges_with_order_at_least_one() {
        let shape = FootShape::SemiSphere { radius: R };
        let exact = submerged_area(&shape, 0.6 * R).unwrap();
        let err = |n| (total(&mesh_submerged(&shape, 0.6 * R, n).unwrap()) - exact).abs();
        let (e1, e2) = (err(1_000), err(16_000));
        // facet size shrinks 4x; order >= 1 means error shrinks >= 4x
        assert!(e1 / e2 > 4.0, "{e1} {e2}");
    }

    #[test]
    fn resolution_guard() {
        assert!(mesh_submerged(&FootShape::SemiSphere { radius: R }, 0.01, 4).is_err());
    }

    #[test]
    fn plate_angle_examples() {
        let bottom = Facet {
            centroid: Vec3::new(0.0, 0.0, -0.01),
            normal: -Vec3::z(),
            area: 1.0,
            depth: 0.01,
        };
        let k = plate_angles(&bottom, &Vector2::zeros(), -0.1);
        assert_eq!(k.psi1, 0.0);
        assert!(k.degenerate);

        let tilted = Facet {
            normal: Vec3::new(1.0, 0.0, -1.0).normalize(),
            ..bottom
        };
        let k = plate_angles(&tilted, &Vector2::zeros(), -0.1);
        assert_relative_eq!(k.psi1, PI / 4.0, max_relative = 1e-12);

        let side = Facet {
            normal: Vec3::x(),
            ..bottom
        };
        let k = plate_angles(&side, &Vector2::new(-0.2, 0.0), 0.0);
        assert_relative_eq!(scale_normal(k.psi2).abs(), 1.0);
        assert_relative_eq!(k.varphi, 0.0);
    }

    #[test]
    fn scaling_examples() {
        assert_eq!(scale_normal(0.0), 1.0);
        assert_eq!(scale_tangential(0.0), 0.0);
        assert_relative_eq!(scale_normal(PI / 4.0), 0.5, max_relative = 1e-15);
        assert_relative_eq!(scale_tangential(PI / 4.0), 0.5, max_relative = 1e-15);
        assert_relative_eq!(scale_normal(3.0 * PI / 4.0), -0.5, max_relative = 1e-15);
        assert_relative_eq!(scale_tangential(3.0 * PI / 4.0), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn mesh_file_round_trip() {
        let text = "# one triangle\n0 0 0  1 0 0  0 1 0\n\n0 0 0 0 1 0 0 0 1\n";
        let m = TriangleMesh::parse(text).unwrap();
        assert_eq!(m.triangles.len(), 2);
        assert!(TriangleMesh::parse("0 0 0 1 0 0").is_err());
        assert!(TriangleMesh::parse("0 0 0 0 0 0 0 0 0").is_err());
        assert!(TriangleMesh::parse("a b c d e f g h i").is_err());
    }

    #[test]
    fn clipped_mesh_keeps_submerged_part() {
        // downward-facing unit square at the bottom of a unit cube's side
        let m = TriangleMesh::parse(
            "0 0 0 0 1 0 1 1 0\n0 0 0 1 1 0 1 0 0\n\
             1 0 0 1 1 0 1 1 1\n1 0 0 1 1 1 1 0 1\n",
        )
        .unwrap();
        let f = mesh_submerged(&FootShape::Mesh(m), 0.25, 8).unwrap();
        assert_relative_eq!(total(&f), 1.0 + 0.25, max_relative = 1e-12);
        assert!(f.iter().all(|f| f.centroid.z <= 0.0));
    }

    proptest! {
        #[test]
        fn scaling_partition(psi in 0f64..=FRAC_PI_2) {
            prop_assert!((scale_normal(psi) + scale_tangential(psi) - 1.0).abs() < 1e-14);
        }

        #[test]
        fn scaling_extension_magnitudes(psi in -PI..=PI) {
            let s = scale_normal(psi).abs() + scale_tangential(psi).abs();
            prop_assert!((s - 1.0).abs() < 1e-14);
        }

        #[test]
        fn frame_is_orthonormal(nx in -1f64..1.0, ny in -1f64..1.0, nz in -1f64..1.0,
                                ux in -1f64..1.0, uy in -1f64..1.0, uz in -1f64..1.0) {
            let n = Vec3::new(nx, ny, nz);
            prop_assume!(n.norm() > 1e-3);
            let f = Facet { centroid: Vec3::zeros(), normal: n.normalize(), area: 1.0, depth: 0.0 };
            let k = plate_angles(&f, &Vector2::new(ux, uy), uz);
            prop_assert!((k.e3.cross(&k.e1) - k.e2).norm() < 1e-12);
            prop_assert!((k.e1.norm() - 1.0).abs() < 1e-12);
            prop_assert!(k.e1.dot(&k.e2).abs() < 1e-12);
            prop_assert!((0.0..=PI).contains(&k.psi1));
            prop_assert!((-PI..=PI).contains(&k.psi2));
        }
    }
}
