#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use blockage::qd::export_scenario;
use blockage::spec::RunSpec;
use blockage_core::geometry::{Point3, Vec3};
use blockage_core::trace::{ChannelTrace, Ray};
use blockage_core::{wavelength, SPEED_OF_LIGHT};

pub const CARRIER: f64 = 60e9;

/// Free-space gain at 60 GHz over `length` meters, less 7 dB per bounce.
fn gain(length: f64, order: usize) -> f64 {
    let lambda = wavelength(CARRIER);
    20.0 * (lambda / (4.0 * std::f64::consts::PI * length)).log10() - 7.0 * order as f64
}

pub fn ray(vertices: Vec<Point3>) -> Ray {
    let order = vertices.len() - 2;
    let length: f64 = vertices.windows(2).map(|w| w[0].distance(w[1])).sum();
    Ray::new(
        length / SPEED_OF_LIGHT,
        gain(length, order),
        std::f64::consts::PI * order as f64,
        vertices,
    )
    .unwrap()
}

/// One pair (0 -> 1) with only the direct ray at every step.
pub fn los_trace(tx: Point3, rx: &[Point3], dt: f64) -> ChannelTrace {
    let mut nodes = BTreeMap::new();
    nodes.insert(0, vec![tx; rx.len()]);
    nodes.insert(1, rx.to_vec());
    let mut pairs = BTreeMap::new();
    pairs.insert((0, 1), rx.iter().map(|&r| vec![ray(vec![tx, r])]).collect());
    ChannelTrace::new(nodes, pairs, dt).unwrap()
}

/// Axis-aligned wall: coordinate index and value.
#[derive(Clone, Copy)]
pub struct Wall(pub usize, pub f64);

fn get(p: Point3, axis: usize) -> f64 {
    [p.x, p.y, p.z][axis]
}

fn set(p: Point3, axis: usize, v: f64) -> Point3 {
    let mut c = [p.x, p.y, p.z];
    c[axis] = v;
    Vec3::new(c[0], c[1], c[2])
}

fn mirror(p: Point3, w: Wall) -> Point3 {
    set(p, w.0, 2.0 * w.1 - get(p, w.0))
}

fn hit(a: Point3, b: Point3, w: Wall) -> Point3 {
    let t = (w.1 - get(a, w.0)) / (get(b, w.0) - get(a, w.0));
    a.lerp(b, t)
}

/// Image-method path from `tx` to `rx` bouncing off `walls` in order.
pub fn image_path(tx: Point3, rx: Point3, walls: &[Wall]) -> Vec<Point3> {
    let mut images = vec![tx];
    for &w in walls {
        images.push(mirror(*images.last().unwrap(), w));
    }
    let mut points = vec![rx];
    let mut target = rx;
    for (i, &w) in walls.iter().enumerate().rev() {
        let p = hit(target, images[i + 1], w);
        points.push(p);
        target = p;
    }
    points.push(tx);
    points.reverse();
    points
}

/// 10 x 19 x 3 m room: the direct ray, the six first-order and nine
/// second-order reflections.
pub fn room_rays(tx: Point3, rx: Point3) -> Vec<Ray> {
    let walls = [
        Wall(0, 0.0),
        Wall(0, 10.0),
        Wall(1, 0.0),
        Wall(1, 19.0),
        Wall(2, 0.0),
        Wall(2, 3.0),
    ];
    let second = [
        [Wall(2, 0.0), Wall(2, 3.0)],
        [Wall(2, 3.0), Wall(2, 0.0)],
        [Wall(0, 0.0), Wall(0, 10.0)],
        [Wall(0, 10.0), Wall(0, 0.0)],
        [Wall(2, 0.0), Wall(0, 0.0)],
        [Wall(2, 0.0), Wall(0, 10.0)],
        [Wall(2, 3.0), Wall(0, 0.0)],
        [Wall(2, 3.0), Wall(0, 10.0)],
        [Wall(1, 19.0), Wall(2, 0.0)],
    ];
    let mut rays = vec![ray(vec![tx, rx])];
    rays.extend(walls.iter().map(|w| ray(image_path(tx, rx, &[*w]))));
    rays.extend(second.iter().map(|s| ray(image_path(tx, rx, s))));
    rays
}

pub const DYNAMIC_STEPS: usize = 3133;
pub const DYNAMIC_DT: f64 = 0.005;

/// Ceiling TX at (5, 0.1, 2.9), RX walking from (5, 0.1, 1.5) to
/// (5, 18.9, 1.5), 16 rays per step.
pub fn dynamic_trace(steps: usize) -> ChannelTrace {
    let tx = Vec3::new(5.0, 0.1, 2.9);
    let start = Vec3::new(5.0, 0.1, 1.5);
    let end = Vec3::new(5.0, 18.9, 1.5);
    let rx: Vec<Point3> = (0..steps)
        .map(|i| start.lerp(end, i as f64 / (DYNAMIC_STEPS - 1) as f64))
        .collect();
    let mut nodes = BTreeMap::new();
    nodes.insert(0, vec![tx; steps]);
    nodes.insert(1, rx.clone());
    let mut pairs = BTreeMap::new();
    pairs.insert((0, 1), rx.iter().map(|&r| room_rays(tx, r)).collect());
    ChannelTrace::new(nodes, pairs, DYNAMIC_DT).unwrap()
}

/// Fifteen 0.2 x 1.7 m screens crossing the room along +x at y = 1.2 k,
/// each reaching x = 5 shortly after the receiver passes.
pub fn dynamic_spec(scenario: &Path, output: &Path) -> RunSpec {
    let mut text = format!(
        "scenario_dir = {:?}\noutput_dir = {:?}\nmodels_to_compare = [\"obstruction\", \"metis\", \"dked\", \"dked_pc\", \"itu_se\"]\n",
        scenario.display().to_string(),
        output.display().to_string()
    );
    for k in 1..=15 {
        let y = 1.2 * k as f64;
        let v = 1.0 + 0.05 * k as f64;
        let t_cross = (y + 0.3 - 0.1) / 1.2;
        text.push_str(&format!(
            "\n[[obstacles]]\nshape = \"ortho_screen\"\ndimensions = [0.2, 1.7]\nmodel = \"dked\"\nfallback = true\nmobility = {{ type = \"linear\", start = [{}, {y}, 0.0], velocity = [{v}, 0.0, 0.0] }}\n",
            5.0 - v * t_cross
        ));
    }
    RunSpec::parse(&text).unwrap()
}

/// 14 x 7 x 3 m room, nodes at (1, 3, 1.6) and (9, 3, 1.6), direct ray only,
/// 1500 steps of 3.4 ms.
pub fn static_trace() -> ChannelTrace {
    let rx = vec![Vec3::new(9.0, 3.0, 1.6); 1500];
    los_trace(Vec3::new(1.0, 3.0, 1.6), &rx, 3.4e-3)
}

/// A 0.2 x 1.7 m screen starting at (5, 0, 0) and walking +y at 1.2 m/s.
pub fn static_spec(scenario: &Path, output: &Path, model: &str) -> RunSpec {
    RunSpec::parse(&format!(
        r#"
scenario_dir = {:?}
output_dir = {:?}

[[obstacles]]
shape = "ortho_screen"
dimensions = [0.2, 1.7]
model = "{model}"
mobility = {{ type = "linear", start = [5.0, 0.0, 0.0], velocity = [0.0, 1.2, 0.0] }}
"#,
        scenario.display().to_string(),
        output.display().to_string()
    ))
    .unwrap()
}

pub fn write_scenario(trace: &ChannelTrace, dir: &Path) {
    export_scenario(trace, dir, blockage::qd::DEFAULT_EXPORT_FLOOR_DB).unwrap();
}

/// Two pairs, three steps, 2/0/3 and 1/1/0 rays.
pub fn mixed_fixture() -> ChannelTrace {
    let a = Vec3::new(1.0, 2.0, 1.5);
    let b = Vec3::new(6.0, 4.0, 1.25);
    let c = Vec3::new(3.5, 0.5, 2.75);
    let r = |delay: f64, gain: f64, phase: f64, v: Vec<Point3>| Ray::new(delay, gain, phase, v).unwrap();
    let wall = Vec3::new(3.0, 0.0, 1.4);
    let floor = Vec3::new(4.0, 3.0, 0.0);
    let mut pairs = BTreeMap::new();
    pairs.insert(
        (0, 1),
        vec![
            vec![
                r(1.8e-8, -71.25, 0.5, vec![a, b]),
                r(2.5e-8, -80.5, 3.1, vec![a, wall, b]),
            ],
            vec![],
            vec![
                r(1.8e-8, -71.0, -0.25, vec![a, b]),
                r(2.25e-8, -85.125, 1.0, vec![a, floor, b]),
                r(3.125e-8, -95.75, 2.0, vec![a, wall, floor, b]),
            ],
        ],
    );
    pairs.insert(
        (0, 2),
        vec![vec![r(9.5e-9, -65.5, 0.0, vec![a, c])], vec![r(1.5e-8, -77.0, 1.5, vec![a, wall, c])], vec![]],
    );
    let mut nodes = BTreeMap::new();
    nodes.insert(0, vec![a; 3]);
    nodes.insert(1, vec![b; 3]);
    nodes.insert(2, vec![c; 3]);
    ChannelTrace::new(nodes, pairs, 0.005).unwrap()
}
