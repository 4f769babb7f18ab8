//! Hexagonal cell layout, uniform user drops and long-term fading.
//!
//! The layout is the central cell plus its first ring of six neighbours.
//! Neighbour centres sit at angles 0°, 60°, ..., 300° and distance `√3·R`
//! from the origin, so each hexagon has an edge facing those directions
//! (vertices at 30° + k·60°).
//!
//! Long-term fading follows `β = z · (d / d_ref)^(-γ)` with log-normal
//! shadowing `z = 10^(x/10)`, `x ~ N(0, σ²)` drawn independently per link.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Number of cells in the only supported topology (centre + one ring).
pub const RING_CELLS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLayout {
    cell_centers: Vec<Point>,
    cell_radius: f64,
}

impl NetworkLayout {
    pub fn num_cells(&self) -> usize {
        self.cell_centers.len()
    }

    pub fn cell_radius(&self) -> f64 {
        self.cell_radius
    }

    pub fn cell_centers(&self) -> &[Point] {
        &self.cell_centers
    }

    pub fn center(&self, cell: usize) -> Point {
        self.cell_centers[cell]
    }

    /// Distance from the centre to the middle of each edge.
    pub fn apothem(&self) -> f64 {
        self.cell_radius * SQRT_3 / 2.0
    }

    /// Whether `p` lies in the hexagon of `cell` (boundary inclusive).
    pub fn contains(&self, cell: usize, p: Point) -> bool {
        let c = self.cell_centers[cell];
        hexagon_contains(self.cell_radius, p.x - c.x, p.y - c.y)
    }
}

/// Hexagon of circumradius `radius` centred at the origin with edge normals at
/// 0°, 60° and 120°.
fn hexagon_contains(radius: f64, dx: f64, dy: f64) -> bool {
    let apothem = radius * SQRT_3 / 2.0;
    let (s, c) = (SQRT_3 / 2.0, 0.5);
    dx.abs() <= apothem && (c * dx + s * dy).abs() <= apothem && (-c * dx + s * dy).abs() <= apothem
}

pub fn build_hex_layout(num_cells: usize, radius: f64) -> Result<NetworkLayout> {
    if num_cells != RING_CELLS {
        return Err(Error::UnsupportedTopology { num_cells });
    }
    let spacing = SQRT_3 * radius;
    let mut cell_centers = Vec::with_capacity(num_cells);
    cell_centers.push(Point::ORIGIN);
    for k in 0..6 {
        let angle = (k as f64 * 60.0).to_radians();
        cell_centers.push(Point::new(spacing * angle.cos(), spacing * angle.sin()));
    }
    Ok(NetworkLayout {
        cell_centers,
        cell_radius: radius,
    })
}

/// User positions, `positions[cell][user]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserDrop {
    pub positions: Vec<Vec<Point>>,
}

impl UserDrop {
    pub fn users_per_cell(&self) -> usize {
        self.positions.first().map_or(0, Vec::len)
    }

    pub fn position(&self, cell: usize, user: usize) -> Point {
        self.positions[cell][user]
    }
}

/// Drops `users` users uniformly in every cell, outside a disc of
/// `exclusion_radius` around the BS.
///
/// Points are drawn from the hexagon's bounding box and rejected until they
/// fall inside the hexagon and outside the exclusion disc.
pub fn drop_users<R: Rng + ?Sized>(
    layout: &NetworkLayout,
    users: usize,
    exclusion_radius: f64,
    rng: &mut R,
) -> Result<UserDrop> {
    if !(exclusion_radius >= 0.0 && exclusion_radius < layout.cell_radius) {
        return Err(Error::config(
            "exclusion_radius_m",
            format!(
                "must be in [0, cell radius {}), got {exclusion_radius}",
                layout.cell_radius
            ),
        ));
    }
    let radius = layout.cell_radius;
    let half_width = layout.apothem();
    let positions = layout
        .cell_centers
        .iter()
        .map(|center| {
            (0..users)
                .map(|_| loop {
                    let dx = rng.random_range(-half_width..=half_width);
                    let dy = rng.random_range(-radius..=radius);
                    if hexagon_contains(radius, dx, dy) && dx.hypot(dy) >= exclusion_radius {
                        break Point::new(center.x + dx, center.y + dy);
                    }
                })
                .collect()
        })
        .collect();
    Ok(UserDrop { positions })
}

/// Long-term fading tensor, `β[bs][user][cell]`: gain from user `user` of
/// cell `cell` to the BS of cell `bs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScaleCoeffs {
    num_cells: usize,
    users: usize,
    data: Vec<f64>,
}

impl LargeScaleCoeffs {
    pub fn from_fn(
        num_cells: usize,
        users: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(num_cells * users * num_cells);
        for bs in 0..num_cells {
            for user in 0..users {
                for cell in 0..num_cells {
                    data.push(f(bs, user, cell));
                }
            }
        }
        Self {
            num_cells,
            users,
            data,
        }
    }

    pub fn filled(num_cells: usize, users: usize, value: f64) -> Self {
        Self::from_fn(num_cells, users, |_, _, _| value)
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn users(&self) -> usize {
        self.users
    }

    #[inline]
    fn index(&self, bs: usize, user: usize, cell: usize) -> usize {
        debug_assert!(bs < self.num_cells && user < self.users && cell < self.num_cells);
        (bs * self.users + user) * self.num_cells + cell
    }

    #[inline]
    pub fn get(&self, bs: usize, user: usize, cell: usize) -> f64 {
        self.data[self.index(bs, user, cell)]
    }

    pub fn set(&mut self, bs: usize, user: usize, cell: usize, value: f64) {
        let idx = self.index(bs, user, cell);
        self.data[idx] = value;
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            data: self.data.iter().map(|b| b * factor).collect(),
            ..self.clone()
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

pub fn path_gain(distance: f64, reference_distance: f64, exponent: f64) -> f64 {
    (distance / reference_distance).powf(-exponent)
}

/// Path loss plus log-normal shadowing for every BS-user pair.
///
/// Shadowing values are drawn in `(bs, user, cell)` order, one per link.
pub fn compute_large_scale<R: Rng + ?Sized>(
    layout: &NetworkLayout,
    drop: &UserDrop,
    exponent: f64,
    shadow_sigma_db: f64,
    reference_distance: f64,
    rng: &mut R,
) -> Result<LargeScaleCoeffs> {
    if exponent.is_nan() || exponent <= 2.0 {
        return Err(Error::config(
            "pathloss_exponent",
            format!("must exceed 2, got {exponent}"),
        ));
    }
    let bad_sigma = || {
        Error::config(
            "shadow_sigma_db",
            format!("must be finite and >= 0, got {shadow_sigma_db}"),
        )
    };
    if shadow_sigma_db.is_nan() || shadow_sigma_db < 0.0 {
        return Err(bad_sigma());
    }
    let shadowing = Normal::new(0.0, shadow_sigma_db).map_err(|_| bad_sigma())?;
    let num_cells = layout.num_cells();
    let users = drop.users_per_cell();
    let mut data = Vec::with_capacity(num_cells * users * num_cells);
    for bs in 0..num_cells {
        let center = layout.center(bs);
        for user in 0..users {
            for cell in 0..num_cells {
                let d = center.distance(&drop.position(cell, user));
                if d <= 0.0 {
                    return Err(Error::DegenerateDistance { bs, user, cell });
                }
                let x_db: f64 = shadowing.sample(rng);
                data.push(10f64.powf(x_db / 10.0) * path_gain(d, reference_distance, exponent));
            }
        }
    }
    Ok(LargeScaleCoeffs {
        num_cells,
        users,
        data,
    })
}
