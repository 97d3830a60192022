//! Resultant mud forces: closed forms for the canonical feet and brute-force
//! quadrature over a tessellated surface.
//!
//! Sign convention: `fz` is the vertical force on the foot, positive up
//! (support while intruding, negative under suction). `fx`/`fy` are the
//! horizontal resistance, positive when it opposes motion towards `+x`/`+y`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{MudError, Result};
use crate::geometry::{
    contact_angle, contact_sin_cos, effective_area, heading, mesh_submerged, plate_angles,
    scale_normal, scale_tangential, wrap_angle, Facet, FootShape, PlateKinematics, Vec3,
};

/// Total stress per world direction, Pa.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DirectionalStresses {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_z: f64,
}

impl DirectionalStresses {
    pub fn new(sigma_x: f64, sigma_y: f64, sigma_z: f64) -> Self {
        Self {
            sigma_x,
            sigma_y,
            sigma_z,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultantForce {
    pub fx: f64,
    pub fy: f64,
    pub fz: f64,
    pub effective_area: f64,
    pub theta_c: Option<f64>,
}

impl ResultantForce {
    pub fn as_array(&self) -> [f64; 3] {
        [self.fx, self.fy, self.fz]
    }
}

/// How a facet contributes to the resultant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetRule {
    /// Per-plate decomposition with normal and tangential weights in both
    /// planes; horizontal stress on the horizontally projected area.
    Plate,
    /// Horizontal-section form used for prismatic feet: normal weight only in
    /// the vertical, and each horizontal axis charged to the facets facing it.
    Sectional,
}

impl FacetRule {
    pub fn for_shape(shape: &FootShape) -> FacetRule {
        match shape {
            FootShape::Flat { .. } | FootShape::SemiCylinder { .. } => FacetRule::Sectional,
            _ => FacetRule::Plate,
        }
    }
}

/// Elementary force on one facet (plate rule).
pub fn facet_force(facet: &Facet, kin: &PlateKinematics, stresses: &DirectionalStresses) -> Vec3 {
    if facet.centroid.z > 0.0 {
        return Vec3::zeros();
    }
    let (p1, p2) = (kin.psi1, kin.psi2);
    let dfz = stresses.sigma_z
        * (scale_normal(p1) * p1.cos() + scale_tangential(p1) * p1.sin())
        * facet.area;
    let horizontal = facet.area * Vector2::new(facet.normal.x, facet.normal.y).norm();
    if horizontal == 0.0 {
        return Vec3::new(0.0, 0.0, dfz);
    }
    let (fn2, ft2) = (scale_normal(p2), scale_tangential(p2));
    let w = fn2 * kin.e2 - ft2 * kin.e1;
    Vec3::new(
        stresses.sigma_x * w.x * horizontal,
        stresses.sigma_y * w.y * horizontal,
        dfz,
    )
}

/// Elementary force on one facet (sectional rule); `varphi` is the motion heading.
pub fn facet_force_sectional(
    facet: &Facet,
    kin: &PlateKinematics,
    varphi: f64,
    stresses: &DirectionalStresses,
) -> Vec3 {
    if facet.centroid.z > 0.0 {
        return Vec3::zeros();
    }
    let p1 = kin.psi1;
    let dfz = stresses.sigma_z * scale_normal(p1) * p1.cos() * facet.area;
    let phi_c = wrap_angle(FRAC_PI_2 - varphi);
    // opposing faces each carry half of the section
    let ax = 0.5 * facet.normal.x.abs() * facet.area;
    let ay = 0.5 * facet.normal.y.abs() * facet.area;
    Vec3::new(
        ax * scale_normal(varphi) * stresses.sigma_x + ay * scale_tangential(phi_c) * stresses.sigma_y,
        ax * scale_tangential(varphi) * stresses.sigma_x + ay * scale_normal(phi_c) * stresses.sigma_y,
        dfz,
    )
}

/// Sums facet forces over the tessellated submerged surface.
pub fn integrate_mesh(
    shape: &FootShape,
    z: f64,
    velocity: &Vec3,
    stresses: &DirectionalStresses,
    resolution: usize,
) -> Result<ResultantForce> {
    let facets = mesh_submerged(shape, z.max(0.0), resolution)?;
    Ok(integrate_facets(
        &facets,
        FacetRule::for_shape(shape),
        velocity,
        stresses,
        effective_area(shape, z.max(0.0)),
        theta_of(shape, z),
    ))
}

/// Sums facet forces over an explicit facet list, in order.
pub fn integrate_facets(
    facets: &[Facet],
    rule: FacetRule,
    velocity: &Vec3,
    stresses: &DirectionalStresses,
    effective_area: f64,
    theta_c: Option<f64>,
) -> ResultantForce {
    let u_h = Vector2::new(velocity.x, velocity.y);
    let varphi = heading(&u_h);
    let mut sum = Vec3::zeros();
    let mut comp = Vec3::zeros();
    for f in facets {
        let kin = plate_angles(f, &u_h, velocity.z);
        let d = match rule {
            FacetRule::Plate => facet_force(f, &kin, stresses),
            FacetRule::Sectional => facet_force_sectional(f, &kin, varphi, stresses),
        };
        // Kahan summation keeps 1e5-facet sums reproducible to the last digits
        let y = d - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    ResultantForce {
        fx: sum.x,
        fy: sum.y,
        fz: sum.z,
        effective_area,
        theta_c,
    }
}

fn theta_of(shape: &FootShape, z: f64) -> Option<f64> {
    match shape {
        FootShape::SemiCylinder { radius, .. } | FootShape::SemiSphere { radius } => {
            contact_angle(z.max(0.0), *radius).ok()
        }
        _ => None,
    }
}

/// `theta - sin(theta)cos(theta)`, by series where it cancels.
fn segment_factor(theta: f64, s: f64, c: f64) -> f64 {
    if theta < 1e-2 {
        let t2 = theta * theta;
        theta * t2 * (2.0 / 3.0 - t2 * (2.0 / 15.0 - t2 * (4.0 / 315.0 - t2 * 2.0 / 2835.0)))
    } else {
        theta - s * c
    }
}

/// Rectangular flat foot, `length` along `y`, `width` along `x`.
pub fn force_flat(
    length: f64,
    width: f64,
    z: f64,
    varphi: f64,
    stresses: &DirectionalStresses,
) -> ResultantForce {
    let z = z.max(0.0);
    let phi = wrap_angle(varphi);
    let phi_c = wrap_angle(FRAC_PI_2 - phi);
    let (sx, sy) = (stresses.sigma_x, stresses.sigma_y);
    ResultantForce {
        fx: z * (length * scale_normal(phi) * sx + width * scale_tangential(phi_c) * sy),
        fy: z * (length * scale_tangential(phi) * sx + width * scale_normal(phi_c) * sy),
        fz: length * width * stresses.sigma_z,
        effective_area: length * width,
        theta_c: None,
    }
}

/// Semi-cylindrical foot of radius `radius`, axis along `x` over `width`.
pub fn force_semi_cylinder(
    radius: f64,
    width: f64,
    z: f64,
    varphi: f64,
    stresses: &DirectionalStresses,
) -> ResultantForce {
    let z = z.max(0.0);
    let theta = contact_angle(z, radius).unwrap_or(0.0);
    let (s, c) = contact_sin_cos(z, radius);
    let area = 2.0 * radius * width * s;
    let section = radius * radius * segment_factor(theta, s, c);
    let side = width * radius * (1.0 - c);
    let phi = wrap_angle(varphi);
    let phi_c = wrap_angle(FRAC_PI_2 - phi);
    let (sx, sy) = (stresses.sigma_x, stresses.sigma_y);
    ResultantForce {
        fx: section * scale_normal(phi) * sx + side * scale_tangential(phi_c) * sy,
        fy: section * scale_tangential(phi) * sx + side * scale_normal(phi_c) * sy,
        fz: area * (2.0 + c * c) / 3.0 * stresses.sigma_z,
        effective_area: area,
        theta_c: Some(theta),
    }
}

/// Bracket of the hemisphere's vertical force, `F_z = S_e/4 · B · sigma_z`.
pub fn sphere_vertical_bracket(theta: f64) -> f64 {
    if theta < 1e-2 {
        let t = theta;
        let t2 = t * t;
        4.0 + t2
            * (-2.0 + t * (8.0 / 5.0 + t * (2.0 / 3.0 + t * (-8.0 / 35.0 - t * 4.0 / 45.0))))
    } else {
        let (s, c) = theta.sin_cos();
        2.0 + 2.0 * c * c + 2.0 * c * c * c / s - 5.0 * c / s + 3.0 * theta / (s * s)
    }
}

/// Hemispherical foot of radius `radius`.
pub fn force_semi_sphere(
    radius: f64,
    z: f64,
    varphi: f64,
    stresses: &DirectionalStresses,
) -> ResultantForce {
    let z = z.max(0.0);
    let theta = contact_angle(z, radius).unwrap_or(0.0);
    let (s, c) = contact_sin_cos(z, radius);
    let area = PI * radius * radius * s * s;
    let horizontal = 8.0 / 3.0 * radius * radius * segment_factor(theta, s, c);
    let phi = wrap_angle(varphi);
    ResultantForce {
        fx: horizontal * phi.cos() * stresses.sigma_x,
        fy: horizontal * phi.sin() * stresses.sigma_y,
        fz: 0.25 * area * sphere_vertical_bracket(theta) * stresses.sigma_z,
        effective_area: area,
        theta_c: Some(theta),
    }
}

/// Morphing foot: `F_z = area · sigma_z`, horizontal forces of the equivalent square flat foot.
pub fn force_variable_area(
    area: f64,
    z: f64,
    varphi: f64,
    stresses: &DirectionalStresses,
) -> Result<ResultantForce> {
    if !(area >= 0.0) {
        return Err(MudError::Domain(format!("area must be >= 0, got {area}")));
    }
    let side = area.sqrt();
    let mut f = force_flat(side, side, z, varphi, stresses);
    f.fz = area * stresses.sigma_z;
    f.effective_area = area;
    Ok(f)
}

/// Closed-form resultant for any shape that has one.
pub fn closed_form_force(
    shape: &FootShape,
    z: f64,
    varphi: f64,
    area_override: Option<f64>,
    stresses: &DirectionalStresses,
) -> Result<ResultantForce> {
    match shape {
        FootShape::Flat { length, width } => Ok(force_flat(*length, *width, z, varphi, stresses)),
        FootShape::SemiCylinder { radius, width } => {
            Ok(force_semi_cylinder(*radius, *width, z, varphi, stresses))
        }
        FootShape::SemiSphere { radius } => Ok(force_semi_sphere(*radius, z, varphi, stresses)),
        FootShape::VariableAreaFlat(_) => {
            let area = area_override.unwrap_or_else(|| effective_area(shape, z));
            force_variable_area(area, z, varphi, stresses)
        }
        FootShape::Mesh(_) => Err(MudError::Geometry(
            "a user mesh has no closed form; use mesh integration".into(),
        )),
    }
}

/// Areas used to turn forces into stresses: `(x, y, z)` cross-sections at depth `z`.
pub fn cross_section_areas(shape: &FootShape, z: f64) -> [f64; 3] {
    let z = z.max(0.0);
    match shape {
        FootShape::Flat { length, width } => [length * z, width * z, length * width],
        FootShape::SemiCylinder { radius, width } => {
            let theta = contact_angle(z, *radius).unwrap_or(0.0);
            let (s, c) = contact_sin_cos(z, *radius);
            [
                radius * radius * segment_factor(theta, s, c),
                width * radius * (1.0 - c),
                2.0 * radius * width * s,
            ]
        }
        FootShape::SemiSphere { radius } => {
            let theta = contact_angle(z, *radius).unwrap_or(0.0);
            let (s, c) = contact_sin_cos(z, *radius);
            let seg = radius * radius * segment_factor(theta, s, c);
            [seg, seg, PI * radius * radius * s * s]
        }
        FootShape::VariableAreaFlat(_) => {
            let a = effective_area(shape, z);
            let side = a.sqrt();
            [side * z, side * z, a]
        }
        FootShape::Mesh(_) => {
            let facets = mesh_submerged(shape, z, 8).unwrap_or_default();
            let mut out = [0.0; 3];
            for f in &facets {
                out[0] += 0.5 * f.normal.x.abs() * f.area;
                out[1] += 0.5 * f.normal.y.abs() * f.area;
                out[2] += (-f.normal.z).max(0.0) * f.area;
            }
            out
        }
    }
}
