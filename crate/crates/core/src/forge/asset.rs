//! Part-decomposed assets and the union SDF over their parts.

use crate::error::{Error, Result};
use crate::forge::primitive::{PartPrimitive, PrimitiveKind};
use crate::math::{round_sig, vec3, Aabb, Pose, Quat, Vec3};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// One part: the union of up to four primitives.
#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub primitives: Vec<PartPrimitive>,
}

impl Part {
    pub fn new(primitives: Vec<PartPrimitive>) -> Part {
        Part { primitives }
    }

    /// Union SDF of the part plus the albedo of the nearest primitive.
    pub fn sdf(&self, p: Vec3) -> (f64, [f64; 3]) {
        let mut best = f64::INFINITY;
        let mut albedo = [0.0; 3];
        for prim in &self.primitives {
            let d = prim.sdf(p);
            if d < best {
                best = d;
                albedo = prim.albedo;
            }
        }
        (best, albedo)
    }

    pub fn world_aabb(&self) -> Aabb {
        self.primitives
            .iter()
            .fold(Aabb::empty(), |acc, p| acc.union(p.world_aabb()))
    }

    fn validate(&self) -> Result<()> {
        if self.primitives.is_empty() || self.primitives.len() > 4 {
            return Err(Error::InvalidInput(format!(
                "a part must hold 1..=4 primitives, got {}",
                self.primitives.len()
            )));
        }
        for p in &self.primitives {
            p.validate()?;
        }
        Ok(())
    }
}

/// Result of a union SDF query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdfHit {
    pub distance: f64,
    pub part_index: usize,
    pub albedo: [f64; 3],
}

/// An ordered list of parts; the order defines the part index `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Asset {
    pub id: String,
    pub parts: Vec<Part>,
    pub bounds: Aabb,
}

impl Asset {
    pub fn new(id: impl Into<String>, parts: Vec<Part>) -> Result<Asset> {
        let mut asset = Asset {
            id: id.into(),
            parts,
            bounds: Aabb::empty(),
        };
        asset.recompute_bounds();
        asset.validate()?;
        Ok(asset)
    }

    pub fn validate(&self) -> Result<()> {
        if self.parts.is_empty() {
            return Err(Error::InvalidInput("asset has no parts".into()));
        }
        for part in &self.parts {
            part.validate()?;
        }
        Ok(())
    }

    pub fn recompute_bounds(&mut self) {
        self.bounds = self
            .parts
            .iter()
            .fold(Aabb::empty(), |acc, p| acc.union(p.world_aabb()));
    }

    /// Translate all parts so the bounding box is centered on the origin.
    pub fn center_on_origin(&mut self) {
        let offset = self.bounds.center();
        for part in &mut self.parts {
            for prim in &mut part.primitives {
                prim.pose.translation = prim.pose.translation - offset;
            }
        }
        self.recompute_bounds();
    }

    /// Asset with the listed part indices removed (order preserved).
    pub fn without_parts(&self, remove: &[usize]) -> Asset {
        let parts = self
            .parts
            .iter()
            .enumerate()
            .filter(|(i, _)| !remove.contains(i))
            .map(|(_, p)| p.clone())
            .collect();
        let mut asset = Asset {
            id: self.id.clone(),
            parts,
            bounds: Aabb::empty(),
        };
        asset.recompute_bounds();
        asset
    }
}

/// Union SDF over all parts: min distance, argmin part (lowest index on
/// ties), and the albedo of the nearest primitive.
pub fn sdf_eval(asset: &Asset, p: Vec3) -> SdfHit {
    let mut hit = SdfHit {
        distance: f64::INFINITY,
        part_index: 0,
        albedo: [0.0; 3],
    };
    for (k, part) in asset.parts.iter().enumerate() {
        let (d, albedo) = part.sdf(p);
        if d < hit.distance {
            hit = SdfHit {
                distance: d,
                part_index: k,
                albedo,
            };
        }
    }
    hit
}

// --------------------------------------------------------------------------
// Versioned JSON file form. Floats are rounded to 9 significant decimal
// digits before writing so serialized assets are compact and reproducible.
// --------------------------------------------------------------------------

const ASSET_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct PrimitiveFile {
    kind: PrimitiveKind,
    rotation: [f64; 4],
    translation: [f64; 3],
    scale: [f64; 3],
    albedo: [f64; 3],
}

#[derive(Serialize, Deserialize)]
struct PartFile {
    primitives: Vec<PrimitiveFile>,
}

#[derive(Serialize, Deserialize)]
struct AssetFile {
    version: u32,
    id: String,
    parts: Vec<PartFile>,
    bounds_min: [f64; 3],
    bounds_max: [f64; 3],
}

fn r9(x: f64) -> f64 {
    round_sig(x, 9)
}

fn r9v(v: Vec3) -> [f64; 3] {
    [r9(v.x), r9(v.y), r9(v.z)]
}

impl Asset {
    pub fn to_json_string(&self) -> Result<String> {
        let file = AssetFile {
            version: ASSET_FILE_VERSION,
            id: self.id.clone(),
            parts: self
                .parts
                .iter()
                .map(|part| PartFile {
                    primitives: part
                        .primitives
                        .iter()
                        .map(|p| PrimitiveFile {
                            kind: p.kind,
                            rotation: [
                                r9(p.pose.rotation.w),
                                r9(p.pose.rotation.x),
                                r9(p.pose.rotation.y),
                                r9(p.pose.rotation.z),
                            ],
                            translation: r9v(p.pose.translation),
                            scale: r9v(p.scale),
                            albedo: [r9(p.albedo[0]), r9(p.albedo[1]), r9(p.albedo[2])],
                        })
                        .collect(),
                })
                .collect(),
            bounds_min: r9v(self.bounds.min),
            bounds_max: r9v(self.bounds.max),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json_str(s: &str) -> Result<Asset> {
        let file: AssetFile = serde_json::from_str(s)?;
        if file.version != ASSET_FILE_VERSION {
            return Err(Error::BadFormat(format!(
                "unsupported asset file version {}",
                file.version
            )));
        }
        let parts = file
            .parts
            .into_iter()
            .map(|part| Part {
                primitives: part
                    .primitives
                    .into_iter()
                    .map(|p| PartPrimitive {
                        kind: p.kind,
                        // Keep the stored components verbatim so a load/save
                        // cycle is a fixed point; validate() still enforces
                        // orthonormality within 1e-6.
                        pose: Pose::new(
                            Quat {
                                w: p.rotation[0],
                                x: p.rotation[1],
                                y: p.rotation[2],
                                z: p.rotation[3],
                            },
                            vec3(p.translation[0], p.translation[1], p.translation[2]),
                        ),
                        scale: vec3(p.scale[0], p.scale[1], p.scale[2]),
                        albedo: p.albedo,
                    })
                    .collect(),
            })
            .collect();
        // Bounds come from the file verbatim (they were computed before the
        // 9-digit rounding) so that load/save is a fixed point.
        let asset = Asset {
            id: file.id,
            parts,
            bounds: Aabb::new(
                vec3(file.bounds_min[0], file.bounds_min[1], file.bounds_min[2]),
                vec3(file.bounds_max[0], file.bounds_max[1], file.bounds_max[2]),
            ),
        };
        asset.validate()?;
        Ok(asset)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Asset> {
        let text = std::fs::read_to_string(path).map_err(|_| Error::MissingInput {
            path: path.to_path_buf(),
        })?;
        Asset::from_json_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::primitive::PrimitiveKind;

    fn sphere_part(center: Vec3, r: f64) -> Part {
        Part::new(vec![PartPrimitive::new(
            PrimitiveKind::Sphere,
            Pose::new(Quat::IDENTITY, center),
            vec3(r, r, r),
            [0.8, 0.2, 0.2],
        )])
    }

    #[test]
    fn union_semantics_and_tie_break() {
        let asset = Asset::new(
            "two-spheres",
            vec![
                sphere_part(vec3(-0.5, 0.0, 0.0), 1.0),
                sphere_part(vec3(0.5, 0.0, 0.0), 1.0),
            ],
        )
        .unwrap();
        // Point inside both, equidistant to both surfaces: lowest index wins.
        let hit = sdf_eval(&asset, Vec3::ZERO);
        assert_eq!(hit.part_index, 0);
        assert!(hit.distance < 0.0);
        // Clearly nearest to part 1.
        let hit = sdf_eval(&asset, vec3(1.4, 0.0, 0.0));
        assert_eq!(hit.part_index, 1);
    }

    #[test]
    fn unit_sphere_example() {
        let asset = Asset::new("unit", vec![sphere_part(Vec3::ZERO, 1.0)]).unwrap();
        let hit = sdf_eval(&asset, vec3(0.0, 0.0, 2.0));
        assert!((hit.distance - 1.0).abs() < 1e-12);
        assert_eq!(hit.part_index, 0);
        assert!(sdf_eval(&asset, vec3(1.0, 0.0, 0.0)).distance.abs() < 1e-6);
    }

    #[test]
    fn json_roundtrip_is_stable() {
        let mut asset = Asset::new(
            "rt",
            vec![
                sphere_part(vec3(0.1234567891234, 0.0, 0.0), 0.75),
                sphere_part(vec3(0.0, 1.0, 0.0), 0.5),
            ],
        )
        .unwrap();
        asset.parts[0].primitives[0].pose.rotation =
            Quat::from_axis_angle(vec3(1.0, 2.0, 3.0), 0.456);
        asset.recompute_bounds();
        let one = asset.to_json_string().unwrap();
        let parsed = Asset::from_json_str(&one).unwrap();
        let two = parsed.to_json_string().unwrap();
        assert_eq!(one, two, "serialized form must be a fixed point");
    }
}
