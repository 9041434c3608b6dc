use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, Error, Result};

/// Default stop-to-stop jam spacing: 5 m body plus 2.5 m gap.
pub const DEFAULT_BODY_LENGTH_M: f64 = 5.0;
pub const MIN_SPACING_M: f64 = DEFAULT_BODY_LENGTH_M + 2.5;
pub const DEFAULT_LANE_LENGTH_M: f64 = 300.0;
pub const DEFAULT_VMAX_MS: f64 = 11.0;
pub const DEFAULT_YELLOW_S: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Approach {
    N,
    E,
    S,
    W,
}

impl Approach {
    pub fn opposite(self) -> Approach {
        match self {
            Approach::N => Approach::S,
            Approach::S => Approach::N,
            Approach::E => Approach::W,
            Approach::W => Approach::E,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Turn {
    Straight,
    Left,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Movement {
    pub id: usize,
    pub in_lane: usize,
    pub turn: Turn,
    pub approach: Approach,
}

/// Symmetric conflict relation over movements. The diagonal is always false.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictMatrix {
    size: usize,
    cells: Vec<bool>,
}

impl ConflictMatrix {
    pub fn empty(size: usize) -> Self {
        ConflictMatrix {
            size,
            cells: vec![false; size * size],
        }
    }

    /// Builds the relation from unordered id pairs.
    pub fn from_pairs(size: usize, pairs: &[[usize; 2]]) -> Result<Self> {
        let mut matrix = Self::empty(size);
        for &[a, b] in pairs {
            if a >= size || b >= size {
                return Err(Error::InvalidIntersection(format!(
                    "conflict pair ({a}, {b}) references unknown movement"
                )));
            }
            if a == b {
                return Err(Error::InvalidIntersection(format!(
                    "movement {a} cannot conflict with itself"
                )));
            }
            matrix.set(a, b);
        }
        Ok(matrix)
    }

    /// The standard four-arm rule: two movements are compatible when they come
    /// from the same approach, or from opposing approaches with the same turn.
    pub fn from_geometry(movements: &[Movement]) -> Self {
        let mut matrix = Self::empty(movements.len());
        for a in movements {
            for b in movements {
                if a.id >= b.id {
                    continue;
                }
                let compatible = a.approach == b.approach
                    || (a.approach.opposite() == b.approach && a.turn == b.turn);
                if !compatible {
                    matrix.set(a.id, b.id);
                }
            }
        }
        matrix
    }

    fn set(&mut self, a: usize, b: usize) {
        self.cells[a * self.size + b] = true;
        self.cells[b * self.size + a] = true;
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn conflicts(&self, a: usize, b: usize) -> bool {
        self.cells[a * self.size + b]
    }

    /// Every conflicting pair `(a, b)` with `a < b`.
    pub fn pairs(&self) -> Vec<[usize; 2]> {
        let mut out = Vec::new();
        for a in 0..self.size {
            for b in a + 1..self.size {
                if self.conflicts(a, b) {
                    out.push([a, b]);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phase {
    pub id: usize,
    /// Sorted movement ids.
    pub green_movements: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lane {
    pub length_m: f64,
    pub vmax_ms: f64,
}

impl Default for Lane {
    fn default() -> Self {
        Lane {
            length_m: DEFAULT_LANE_LENGTH_M,
            vmax_ms: DEFAULT_VMAX_MS,
        }
    }
}

/// Every set of exactly `pair_size` mutually compatible movements, in
/// lexicographic order of their sorted ids. Phase ids follow that order.
pub fn enumerate_phases(
    movements: &[Movement],
    conflicts: &ConflictMatrix,
    pair_size: usize,
) -> Result<Vec<Phase>> {
    if pair_size == 0 {
        return Err(Error::InvalidIntersection("pair_size must be >= 1".into()));
    }
    if conflicts.size() != movements.len() {
        return Err(Error::InvalidIntersection(format!(
            "conflict matrix covers {} movements, expected {}",
            conflicts.size(),
            movements.len()
        )));
    }

    fn extend(
        start: usize,
        n: usize,
        want: usize,
        conflicts: &ConflictMatrix,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == want {
            out.push(current.clone());
            return;
        }
        for next in start..n {
            if current.iter().any(|&m| conflicts.conflicts(m, next)) {
                continue;
            }
            current.push(next);
            extend(next + 1, n, want, conflicts, current, out);
            current.pop();
        }
    }

    let mut sets = Vec::new();
    extend(
        0,
        movements.len(),
        pair_size,
        conflicts,
        &mut Vec::with_capacity(pair_size),
        &mut sets,
    );
    if sets.is_empty() {
        return Err(Error::NoFeasiblePhases);
    }
    Ok(sets
        .into_iter()
        .enumerate()
        .map(|(id, green_movements)| Phase {
            id,
            green_movements,
        })
        .collect())
}

/// Static intersection description. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionSpec {
    pub lanes: Vec<Lane>,
    pub movements: Vec<Movement>,
    pub conflicts: ConflictMatrix,
    pub phases: Vec<Phase>,
    pub yellow_duration: u32,
    /// `lane_green[phase][lane]`
    lane_green: Vec<Vec<bool>>,
    /// Movement id carried by each lane.
    lane_movement: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MovementDoc {
    lane: usize,
    approach: Approach,
    turn: Turn,
}

/// On-disk intersection document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntersectionDoc {
    yellow_duration: u32,
    lanes: Vec<Lane>,
    movements: Vec<MovementDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    conflicts: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phases: Option<Vec<Vec<usize>>>,
}

impl IntersectionSpec {
    /// Validates and assembles a spec. When `phases` is `None` they are
    /// enumerated as compatible movement pairs.
    pub fn new(
        lanes: Vec<Lane>,
        movements: Vec<Movement>,
        conflicts: ConflictMatrix,
        phases: Option<Vec<Vec<usize>>>,
        yellow_duration: u32,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidIntersection(msg));
        if yellow_duration < 1 {
            return invalid("yellow_duration must be >= 1".into());
        }
        if lanes.is_empty() {
            return invalid("at least one lane is required".into());
        }
        for (j, lane) in lanes.iter().enumerate() {
            if !(lane.length_m.is_finite() && lane.length_m > 0.0) {
                return invalid(format!("lane {j}: length_m must be positive"));
            }
            if !(lane.vmax_ms.is_finite() && lane.vmax_ms > 0.0) {
                return invalid(format!("lane {j}: vmax_ms must be positive"));
            }
        }
        if movements.len() != lanes.len() {
            return invalid(format!(
                "{} movements for {} lanes; each lane carries exactly one movement",
                movements.len(),
                lanes.len()
            ));
        }
        let mut lane_movement = vec![usize::MAX; lanes.len()];
        for (idx, m) in movements.iter().enumerate() {
            if m.id != idx {
                return invalid(format!(
                    "movement ids must be dense, found {} at {idx}",
                    m.id
                ));
            }
            if m.in_lane >= lanes.len() {
                return invalid(format!("movement {idx} references lane {}", m.in_lane));
            }
            if lane_movement[m.in_lane] != usize::MAX {
                return invalid(format!("lane {} carries more than one movement", m.in_lane));
            }
            lane_movement[m.in_lane] = idx;
        }
        if conflicts.size() != movements.len() {
            return invalid("conflict matrix size does not match movement count".into());
        }

        let phases = match phases {
            None => enumerate_phases(&movements, &conflicts, 2)?,
            Some(sets) => {
                if sets.is_empty() {
                    return invalid("phase list is empty".into());
                }
                let mut out = Vec::with_capacity(sets.len());
                for (id, mut set) in sets.into_iter().enumerate() {
                    set.sort_unstable();
                    if set.is_empty() {
                        return invalid(format!("phase {id} has no green movements"));
                    }
                    if set.windows(2).any(|w| w[0] == w[1]) {
                        return invalid(format!("phase {id} lists a movement twice"));
                    }
                    if let Some(&bad) = set.iter().find(|&&m| m >= movements.len()) {
                        return invalid(format!("phase {id} references movement {bad}"));
                    }
                    for (i, &a) in set.iter().enumerate() {
                        for &b in &set[i + 1..] {
                            if conflicts.conflicts(a, b) {
                                return invalid(format!(
                                    "phase {id} makes conflicting movements {a} and {b} green"
                                ));
                            }
                        }
                    }
                    out.push(Phase {
                        id,
                        green_movements: set,
                    });
                }
                out
            }
        };

        let lane_green = phases
            .iter()
            .map(|p| {
                let mut mask = vec![false; lanes.len()];
                for &m in &p.green_movements {
                    mask[movements[m].in_lane] = true;
                }
                mask
            })
            .collect();

        Ok(IntersectionSpec {
            lanes,
            movements,
            conflicts,
            phases,
            yellow_duration,
            lane_green,
            lane_movement,
        })
    }

    /// Eight approaches on four arms (straight + left each), default geometry,
    /// phases derived from the conflict matrix.
    pub fn default_eight() -> Self {
        let mut movements = Vec::new();
        for approach in [Approach::N, Approach::E, Approach::S, Approach::W] {
            for turn in [Turn::Straight, Turn::Left] {
                let id = movements.len();
                movements.push(Movement {
                    id,
                    in_lane: id,
                    turn,
                    approach,
                });
            }
        }
        let conflicts = ConflictMatrix::from_geometry(&movements);
        Self::new(
            vec![Lane::default(); 8],
            movements,
            conflicts,
            None,
            DEFAULT_YELLOW_S,
        )
        .expect("default geometry is valid")
    }

    /// Four straight-only approaches; phases NS (lanes 0, 2) and WE (1, 3).
    pub fn two_phase() -> Self {
        let movements: Vec<Movement> = [Approach::N, Approach::E, Approach::S, Approach::W]
            .into_iter()
            .enumerate()
            .map(|(id, approach)| Movement {
                id,
                in_lane: id,
                turn: Turn::Straight,
                approach,
            })
            .collect();
        let conflicts = ConflictMatrix::from_geometry(&movements);
        Self::new(
            vec![Lane::default(); 4],
            movements,
            conflicts,
            None,
            DEFAULT_YELLOW_S,
        )
        .expect("two-phase geometry is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        load_intersection(&read_to_string(path)?)
    }

    pub fn num_lanes(&self) -> usize {
        self.lanes.len()
    }

    pub fn num_phases(&self) -> usize {
        self.phases.len()
    }

    pub fn min_spacing(&self) -> f64 {
        MIN_SPACING_M
    }

    /// Jam capacity ⌊L / s_min⌋ of a lane.
    pub fn lane_capacity(&self, lane: usize) -> usize {
        (self.lanes[lane].length_m / MIN_SPACING_M).floor() as usize
    }

    /// Whether `lane` is green under `phase` (ignoring yellow).
    pub fn lane_green(&self, phase: usize, lane: usize) -> bool {
        self.lane_green[phase][lane]
    }

    pub fn green_mask(&self, phase: usize) -> &[bool] {
        &self.lane_green[phase]
    }

    pub fn lane_of_movement(&self, movement: usize) -> usize {
        self.movements[movement].in_lane
    }

    pub fn movement_of_lane(&self, lane: usize) -> usize {
        self.lane_movement[lane]
    }

    /// Serializes to the document format, always listing conflicts and phases.
    pub fn to_json(&self) -> String {
        let doc = IntersectionDoc {
            yellow_duration: self.yellow_duration,
            lanes: self.lanes.clone(),
            movements: self
                .movements
                .iter()
                .map(|m| MovementDoc {
                    lane: m.in_lane,
                    approach: m.approach,
                    turn: m.turn,
                })
                .collect(),
            conflicts: Some(self.conflicts.pairs()),
            phases: Some(
                self.phases
                    .iter()
                    .map(|p| p.green_movements.clone())
                    .collect(),
            ),
        };
        serde_json::to_string_pretty(&doc).expect("intersection serializes")
    }
}

/// Parses an intersection document. Missing `conflicts` fall back to the
/// four-arm geometry rule; missing `phases` are enumerated as pairs.
pub fn load_intersection(text: &str) -> Result<IntersectionSpec> {
    let doc: IntersectionDoc = serde_json::from_str(text)
        .map_err(|e| Error::InvalidIntersection(format!("schema violation: {e}")))?;
    let movements: Vec<Movement> = doc
        .movements
        .iter()
        .enumerate()
        .map(|(id, m)| Movement {
            id,
            in_lane: m.lane,
            turn: m.turn,
            approach: m.approach,
        })
        .collect();
    let conflicts = match &doc.conflicts {
        Some(pairs) => ConflictMatrix::from_pairs(movements.len(), pairs)?,
        None => ConflictMatrix::from_geometry(&movements),
    };
    IntersectionSpec::new(
        doc.lanes,
        movements,
        conflicts,
        doc.phases,
        doc.yellow_duration,
    )
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phase {} {:?}", self.id, self.green_movements)
    }
}
