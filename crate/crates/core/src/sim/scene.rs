//! Kitchen layouts: where immovable furniture and movable objects start.

use serde::{Deserialize, Serialize};

use crate::geometry::{Quat, Vec3};
use crate::session::{Aesthetic, ObjectClass, ObjectMeta};

use super::kinematics::Body;

/// Scene objects are kept inside `[-ROOM_HALF, ROOM_HALF]` on x and z.
pub const ROOM_HALF: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub id: String,
    pub class: ObjectClass,
    pub movable: bool,
    pub half_extents: Vec3,
    pub pos: Vec3,
    #[serde(default)]
    pub rot: Quat,
}

impl Placement {
    pub fn meta(&self) -> ObjectMeta {
        ObjectMeta { id: self.id.clone(), class: self.class, movable: self.movable, half_extents: self.half_extents }
    }
}

/// Where the participant stands at the start: head position on the floor
/// plane and facing direction (radians about `+y`, 0 faces `+z`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyStart {
    pub x: f64,
    pub z: f64,
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub body: BodyStart,
    /// Non-body objects. Head and hands are added by the simulator.
    pub objects: Vec<Placement>,
}

/// Horizontal rectangle an object can be set down on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surface {
    pub min_x: f64,
    pub max_x: f64,
    pub min_z: f64,
    pub max_z: f64,
    pub top: f64,
}

impl Surface {
    pub fn contains(&self, x: f64, z: f64) -> bool {
        x >= self.min_x && x <= self.max_x && z >= self.min_z && z <= self.max_z
    }
}

pub fn default_half_extents(class: ObjectClass) -> Vec3 {
    use ObjectClass::*;
    let v = Vec3::new;
    match class {
        Apple => v(0.04, 0.04, 0.04),
        Ball => v(0.06, 0.06, 0.06),
        Banana => v(0.1, 0.03, 0.03),
        Book => v(0.1, 0.02, 0.14),
        Bowl => v(0.08, 0.04, 0.08),
        Cup => v(0.04, 0.05, 0.04),
        Fork | Knife | Spoon => v(0.015, 0.01, 0.09),
        Lamp => v(0.1, 0.2, 0.1),
        Plant => v(0.1, 0.15, 0.1),
        Bear | Bunny | Doll | Dinosaur | Truck | Plane => v(0.08, 0.1, 0.06),
        Head => v(0.1, 0.12, 0.1),
        LeftHand | RightHand => v(0.05, 0.05, 0.08),
        Door => v(0.45, 1.0, 0.03),
        Table => v(0.8, 0.375, 0.5),
        Counter => v(0.3, 0.45, 1.5),
        Sink => v(0.25, 0.05, 0.2),
        Chair => v(0.22, 0.45, 0.22),
        _ => v(0.3, 0.3, 0.3),
    }
}

impl Scene {
    pub fn start_body(&self) -> Body {
        Body { pos: Vec3::new(self.body.x, super::kinematics::HEAD_HEIGHT, self.body.z), yaw: self.body.yaw }
    }

    pub fn surfaces(&self) -> Vec<Surface> {
        self.objects
            .iter()
            .filter(|p| matches!(p.class, ObjectClass::Table | ObjectClass::Counter))
            .map(|p| Surface {
                min_x: p.pos.x - p.half_extents.x,
                max_x: p.pos.x + p.half_extents.x,
                min_z: p.pos.z - p.half_extents.z,
                max_z: p.pos.z + p.half_extents.z,
                top: p.pos.y + p.half_extents.y,
            })
            .collect()
    }

    /// Point above the sink basin where washing happens.
    pub fn sink_point(&self) -> Option<Vec3> {
        self.objects.iter().find(|p| p.class == ObjectClass::Sink).map(|p| p.pos + Vec3::new(0.0, 0.15, 0.0))
    }

    /// One of the six kitchens: two aesthetics (which set of toys is present)
    /// times three furniture layouts.
    pub fn kitchen(aesthetic: Aesthetic, layout: u8) -> Scene {
        let toys = match aesthetic {
            Aesthetic::A => [ObjectClass::Bear, ObjectClass::Doll, ObjectClass::Truck],
            Aesthetic::B => [ObjectClass::Bunny, ObjectClass::Dinosaur, ObjectClass::Plane],
        };
        // (table center xz, counter center xz, door center xz + yaw, chair xz)
        let (table, counter, door, door_yaw, chair) = match layout {
            1 => ((0.0, 1.5), (-3.2, 0.0), (3.9, -2.0), -std::f64::consts::FRAC_PI_2, (0.9, 1.5)),
            2 => ((1.5, -0.5), (0.0, 3.2), (-2.0, -3.9), 0.0, (1.5, 0.4)),
            _ => ((-1.2, -1.0), (3.2, 0.5), (-3.9, 2.0), std::f64::consts::FRAC_PI_2, (-1.2, 0.0)),
        };
        let counter_along_z = layout != 2;
        let mut objects = Vec::new();
        let mut add = |class: ObjectClass, movable: bool, pos: Vec3, rot: Quat| {
            let mut he = default_half_extents(class);
            if class == ObjectClass::Counter && !counter_along_z {
                he = Vec3::new(he.z, he.y, he.x);
            }
            objects.push(Placement { id: class.name().to_string(), class, movable, half_extents: he, pos, rot });
        };
        let t_he = default_half_extents(ObjectClass::Table);
        add(ObjectClass::Table, false, Vec3::new(table.0, t_he.y, table.1), Quat::IDENTITY);
        let c_he = default_half_extents(ObjectClass::Counter);
        add(ObjectClass::Counter, false, Vec3::new(counter.0, c_he.y, counter.1), Quat::IDENTITY);
        let counter_top = 2.0 * c_he.y;
        let sink_he = default_half_extents(ObjectClass::Sink);
        let sink_xz = if counter_along_z { (counter.0, counter.1 + 0.8) } else { (counter.0 + 0.8, counter.1) };
        add(ObjectClass::Sink, false, Vec3::new(sink_xz.0, counter_top - sink_he.y, sink_xz.1), Quat::IDENTITY);
        let d_he = default_half_extents(ObjectClass::Door);
        add(ObjectClass::Door, false, Vec3::new(door.0, d_he.y, door.1), Quat::from_axis_angle(Vec3::Y, door_yaw));
        let ch_he = default_half_extents(ObjectClass::Chair);
        add(ObjectClass::Chair, false, Vec3::new(chair.0, ch_he.y, chair.1), Quat::IDENTITY);

        let table_top = 2.0 * t_he.y;
        let on_table: Vec<ObjectClass> = vec![
            ObjectClass::Apple,
            ObjectClass::Banana,
            ObjectClass::Bowl,
            ObjectClass::Cup,
            ObjectClass::Fork,
            ObjectClass::Knife,
            ObjectClass::Spoon,
            ObjectClass::Lamp,
        ];
        for (i, class) in on_table.into_iter().enumerate() {
            let he = default_half_extents(class);
            let x = table.0 - 0.6 + 0.17 * i as f64;
            let z = table.1 + if i % 2 == 0 { -0.25 } else { 0.25 };
            add(class, true, Vec3::new(x, table_top + he.y, z), Quat::IDENTITY);
        }
        let mut on_counter = vec![ObjectClass::Book, ObjectClass::Plant, ObjectClass::Ball];
        on_counter.extend(toys);
        for (i, class) in on_counter.into_iter().enumerate() {
            let he = default_half_extents(class);
            let off = -1.2 + 0.35 * i as f64;
            let (x, z) = if counter_along_z { (counter.0, counter.1 + off) } else { (counter.0 + off, counter.1) };
            // keep the sink clear
            let (x, z) = if (x - sink_xz.0).abs() < 0.3 && (z - sink_xz.1).abs() < 0.3 {
                if counter_along_z {
                    (x, z - 0.35)
                } else {
                    (x - 0.35, z)
                }
            } else {
                (x, z)
            };
            add(class, true, Vec3::new(x, counter_top + he.y, z), Quat::IDENTITY);
        }
        Scene { body: BodyStart { x: 0.0, z: 0.0, yaw: 0.0 }, objects }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kitchens_have_unique_ids_and_rest_on_surfaces() {
        for a in [Aesthetic::A, Aesthetic::B] {
            for layout in 1..=3 {
                let s = Scene::kitchen(a, layout);
                let mut ids: Vec<&str> = s.objects.iter().map(|p| p.id.as_str()).collect();
                ids.sort();
                let n = ids.len();
                ids.dedup();
                assert_eq!(ids.len(), n);
                let surfaces = s.surfaces();
                for p in s.objects.iter().filter(|p| p.movable) {
                    let bottom = p.pos.y - p.half_extents.y;
                    assert!(
                        surfaces.iter().any(|sf| sf.contains(p.pos.x, p.pos.z) && (sf.top - bottom).abs() < 1e-9),
                        "{} in layout {layout} is not resting on a surface",
                        p.id
                    );
                }
                assert!(s.sink_point().is_some());
                assert_eq!(s.objects.iter().filter(|p| p.movable).count(), 14);
            }
        }
    }
}
