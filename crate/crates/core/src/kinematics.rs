//! Analytic robot models: a 1-DOF cart on a track and a 6-DOF serial arm.
//!
//! The arm is a chain of six revolute joints with axes z, y, y, y, y, z and
//! 0.2 m links. At the zero configuration every link points along +z, so the
//! tip sits at (0, 0, 1.2). Joint 5 rolls the last link about its own axis and
//! therefore never moves the tip.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const LINK_LEN: f64 = 0.2;
pub const ARM_DOF: usize = 6;
pub const ARM_REACH: f64 = LINK_LEN * ARM_DOF as f64;

/// Largest joint change per step, radians.
pub const JOINT_STEP: f64 = 0.035;
/// Largest tip (arm) or cart displacement per step, meters.
pub const CART_STEP: f64 = 0.02;
pub const TIP_STEP: f64 = 0.02;
/// Damping of the per-step least-squares IK solve.
pub const DLS_DAMPING: f64 = 0.01;

pub const CART_TRACK: (f64, f64) = (0.05, 0.60);
pub const ARM_LIMITS: [(f64, f64); ARM_DOF] = [
    (-std::f64::consts::PI, std::f64::consts::PI),
    (-2.0, 2.0),
    (-2.0, 2.0),
    (-2.0, 2.0),
    (-2.0, 2.0),
    (-2.0, 2.0),
];

/// Arm home pose: shoulder and elbow bent forward so the tip hangs in front
/// of the base at roughly shoulder height.
pub const ARM_HOME: [f64; ARM_DOF] = [0.0, 0.6, 0.6, 0.6, 0.0, 0.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RobotKind {
    Cart1D,
    Arm6D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionSpace {
    Cartesian,
    Joint,
}

impl RobotKind {
    /// Action dimension for this robot under the given actuation.
    pub fn action_dim(self, space: ActionSpace) -> usize {
        match (self, space) {
            (RobotKind::Cart1D, _) => 1,
            (RobotKind::Arm6D, ActionSpace::Cartesian) => 3,
            (RobotKind::Arm6D, ActionSpace::Joint) => ARM_DOF,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub values: Vec<f64>,
    pub space: ActionSpace,
}

impl Action {
    pub fn new(values: Vec<f64>, space: ActionSpace) -> Self {
        Self { values, space }
    }

    pub fn zeros(dim: usize, space: ActionSpace) -> Self {
        Self::new(vec![0.0; dim], space)
    }

    fn clamped(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|v| v.clamp(-1.0, 1.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    kind: RobotKind,
    joints: Vec<f64>,
    limits: Vec<(f64, f64)>,
    tip: [f64; 3],
}

impl RobotState {
    pub fn arm(joints: [f64; ARM_DOF]) -> Self {
        let limits = ARM_LIMITS.to_vec();
        let joints: Vec<f64> = joints
            .iter()
            .zip(&limits)
            .map(|(q, (lo, hi))| q.clamp(*lo, *hi))
            .collect();
        let tip = forward_kinematics(&joints);
        Self {
            kind: RobotKind::Arm6D,
            joints,
            limits,
            tip,
        }
    }

    pub fn arm_home() -> Self {
        Self::arm(ARM_HOME)
    }

    pub fn cart(position: f64) -> Self {
        let p = position.clamp(CART_TRACK.0, CART_TRACK.1);
        Self {
            kind: RobotKind::Cart1D,
            joints: vec![p],
            limits: vec![CART_TRACK],
            tip: [p, 0.0, 0.0],
        }
    }

    pub fn kind(&self) -> RobotKind {
        self.kind
    }

    /// Joint angles (arm) or the single cart position.
    pub fn joints(&self) -> &[f64] {
        &self.joints
    }

    pub fn limits(&self) -> &[(f64, f64)] {
        &self.limits
    }

    pub fn tip(&self) -> [f64; 3] {
        self.tip
    }

    /// Proprioceptive reading for the given actuation mode.
    pub fn proprio(&self, space: ActionSpace) -> Vec<f64> {
        match (self.kind, space) {
            (RobotKind::Cart1D, _) => self.joints.clone(),
            (RobotKind::Arm6D, ActionSpace::Cartesian) => self.tip.to_vec(),
            (RobotKind::Arm6D, ActionSpace::Joint) => self.joints.clone(),
        }
    }

    fn with_joints(&self, joints: impl IntoIterator<Item = f64>) -> Self {
        let joints: Vec<f64> = joints
            .into_iter()
            .zip(&self.limits)
            .map(|(q, (lo, hi))| q.clamp(*lo, *hi))
            .collect();
        let tip = match self.kind {
            RobotKind::Arm6D => forward_kinematics(&joints),
            RobotKind::Cart1D => [joints[0], 0.0, 0.0],
        };
        Self {
            kind: self.kind,
            joints,
            limits: self.limits.clone(),
            tip,
        }
    }

    /// Applies an action according to the robot kind and action space.
    pub fn apply(&self, a: &Action) -> Result<Self> {
        match self.kind {
            RobotKind::Cart1D => apply_cart_action(self, a),
            RobotKind::Arm6D => match a.space {
                ActionSpace::Joint => apply_joint_action(self, a),
                ActionSpace::Cartesian => apply_cartesian_action(self, a),
            },
        }
    }
}

fn check_len(a: &Action, expected: usize) -> Result<()> {
    if a.values.len() != expected {
        return Err(Error::Dimension {
            expected,
            actual: a.values.len(),
        });
    }
    Ok(())
}

fn rot_z(q: f64) -> [[f64; 3]; 3] {
    let (s, c) = q.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn rot_y(q: f64) -> [[f64; 3]; 3] {
    let (s, c) = q.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

fn matmul3(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Tip position of the arm for six joint angles.
pub fn forward_kinematics(joints: &[f64]) -> [f64; 3] {
    assert_eq!(joints.len(), ARM_DOF, "arm has six joints");
    let mut rot = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut p = [0.0; 3];
    for (i, &q) in joints.iter().enumerate() {
        let r = if i == 0 || i == ARM_DOF - 1 {
            rot_z(q)
        } else {
            rot_y(q)
        };
        rot = matmul3(&rot, &r);
        for k in 0..3 {
            p[k] += rot[k][2] * LINK_LEN;
        }
    }
    p
}

/// Central-difference Jacobian of the tip position, 3×6.
pub fn jacobian(joints: &[f64]) -> [[f64; ARM_DOF]; 3] {
    const H: f64 = 1e-6;
    let mut jac = [[0.0; ARM_DOF]; 3];
    let mut q = joints.to_vec();
    for j in 0..ARM_DOF {
        q[j] = joints[j] + H;
        let plus = forward_kinematics(&q);
        q[j] = joints[j] - H;
        let minus = forward_kinematics(&q);
        q[j] = joints[j];
        for k in 0..3 {
            jac[k][j] = (plus[k] - minus[k]) / (2.0 * H);
        }
    }
    jac
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    let mut x = [0.0; 3];
    for (c, xc) in x.iter_mut().enumerate() {
        let mut mc = m;
        for r in 0..3 {
            mc[r][c] = b[r];
        }
        *xc = det(&mc) / d;
    }
    x
}

/// One damped-least-squares step: `Δq = Jᵀ (J Jᵀ + λ² I)⁻¹ d`.
pub fn dls_step(joints: &[f64], displacement: [f64; 3], damping: f64) -> [f64; ARM_DOF] {
    let jac = jacobian(joints);
    let mut jjt = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            jjt[i][k] = (0..ARM_DOF).map(|j| jac[i][j] * jac[k][j]).sum();
        }
        jjt[i][i] += damping * damping;
    }
    let y = solve3(jjt, displacement);
    let mut dq = [0.0; ARM_DOF];
    for (j, d) in dq.iter_mut().enumerate() {
        *d = (0..3).map(|i| jac[i][j] * y[i]).sum();
    }
    dq
}

/// Moves each arm joint by `a·JOINT_STEP`, clamped to its limits.
pub fn apply_joint_action(state: &RobotState, a: &Action) -> Result<RobotState> {
    if state.kind != RobotKind::Arm6D || a.space != ActionSpace::Joint {
        return Err(Error::Config("joint actions apply to the arm only".into()));
    }
    check_len(a, ARM_DOF)?;
    Ok(state.with_joints(
        state
            .joints
            .iter()
            .zip(a.clamped())
            .map(|(q, v)| q + v * JOINT_STEP),
    ))
}

/// Requests a tip displacement of `a·TIP_STEP` and takes a single damped
/// least-squares step toward it. The achieved displacement is approximate.
pub fn apply_cartesian_action(state: &RobotState, a: &Action) -> Result<RobotState> {
    if state.kind != RobotKind::Arm6D || a.space != ActionSpace::Cartesian {
        return Err(Error::Config(
            "Cartesian actions apply to the arm only".into(),
        ));
    }
    check_len(a, 3)?;
    let mut d = [0.0; 3];
    for (di, v) in d.iter_mut().zip(a.clamped()) {
        *di = v * TIP_STEP;
    }
    if d == [0.0; 3] {
        return Ok(state.clone());
    }
    let dq = dls_step(&state.joints, d, DLS_DAMPING);
    Ok(state.with_joints(state.joints.iter().zip(dq).map(|(q, dq)| q + dq)))
}

/// Moves the cart by `a·CART_STEP` along its track; the end blocks clamp it.
pub fn apply_cart_action(state: &RobotState, a: &Action) -> Result<RobotState> {
    if state.kind != RobotKind::Cart1D {
        return Err(Error::Config("cart actions apply to the cart only".into()));
    }
    check_len(a, 1)?;
    let v = a.clamped().next().unwrap_or(0.0);
    Ok(state.with_joints([state.joints[0] + v * CART_STEP]))
}
