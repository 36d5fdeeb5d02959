//! EQA dataset-extension pipeline: final-W frame context selection,
//! instruction-centric prompt assembly, and structured three-part response
//! parsing. Generation itself goes through the pluggable client in
//! [`client`]; the deterministic mock is the default.

pub mod client;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Trajectory;

pub use client::{
    generator_from_env, GenerationClient, Generator, HttpClient, MockClient, TransportError,
    WireRequest, WireResponse, ENV_ENDPOINT, ENV_RETRY_LIMIT,
};

/// Fixed response section headers of the wire format.
pub const SCENE_HEADER: &str = "Scene:";
pub const PLAN_HEADER: &str = "Plan:";
pub const REASONING_HEADER: &str = "Reasoning:";

/// Role specification prepended to every prompt.
pub const DEFAULT_ROLE_PREAMBLE: &str = "Assuming you are a robot navigating an indoor \
environment, analyze your own trajectory from a first-person perspective. Answer in three \
sections headed \"Scene:\", \"Plan:\" and \"Reasoning:\".";

/// Three-part structured answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredResponse {
    #[serde(rename = "scene")]
    pub scene_description: String,
    #[serde(rename = "plan")]
    pub path_planning: String,
    #[serde(rename = "reasoning")]
    pub commonsense: String,
}

/// One worked question/answer example embedded in the prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub question: String,
    pub answer: StructuredResponse,
}

/// Two placeholder exemplars shipped as defaults. They stand in for curated
/// navigation reasoning examples and can be swapped via configuration.
pub fn default_exemplars() -> [Exemplar; 2] {
    [
        Exemplar {
            question: "Find a mug in the kitchen.".to_string(),
            answer: StructuredResponse {
                scene_description: "A kitchen with light counters, an island in the center and \
                 cabinets along the far wall."
                    .to_string(),
                path_planning: "Enter the kitchen, pass the island on its left side, then scan \
                 the countertop near the sink."
                    .to_string(),
                commonsense: "Mugs are usually kept on countertops, open shelves or beside the \
                 coffee maker."
                    .to_string(),
            },
        },
        Exemplar {
            question: "Go to a pillow in the living room.".to_string(),
            answer: StructuredResponse {
                scene_description: "A living room with a gray sofa facing a low table and a rug \
                 between them."
                    .to_string(),
                path_planning: "Move through the doorway, circle around the table and approach \
                 the sofa from the front."
                    .to_string(),
                commonsense: "Pillows are most often placed on sofas and armchairs rather than \
                 on the floor."
                    .to_string(),
            },
        },
    ]
}

/// Assembled generation prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqaPrompt {
    pub role_preamble: String,
    pub exemplars: Vec<Exemplar>,
    pub instruction: String,
    pub frame_refs: Vec<u64>,
}

/// One persisted EQA pair, stored as a JSON line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqaPair {
    pub instruction: String,
    pub frame_refs: Vec<u64>,
    pub scene: String,
    pub plan: String,
    pub reasoning: String,
}

impl EqaPair {
    pub fn new(prompt: &EqaPrompt, response: StructuredResponse) -> Self {
        EqaPair {
            instruction: prompt.instruction.clone(),
            frame_refs: prompt.frame_refs.clone(),
            scene: response.scene_description,
            plan: response.path_planning,
            reasoning: response.commonsense,
        }
    }
}

/// Timesteps of the final `min(len, w)` frames, in chronological order.
pub fn select_context(traj: &Trajectory, w: usize) -> Result<Vec<u64>> {
    if traj.is_empty() {
        return Err(Error::EmptyInput("trajectory"));
    }
    if w == 0 {
        return Err(Error::InvalidConfig("context window must be >= 1".into()));
    }
    let len = traj.len();
    let start = len.saturating_sub(w);
    Ok(traj.observations()[start..].iter().map(|o| o.t).collect())
}

/// Deterministically assemble a prompt from an instruction, selected frame
/// timesteps and exactly two exemplars. Frame refs must be non-empty and
/// contiguous; [`select_context`] guarantees they end at the trajectory's
/// final timestep.
pub fn build_prompt(instruction: &str, frames: &[u64], exemplars: &[Exemplar]) -> Result<EqaPrompt> {
    if instruction.trim().is_empty() {
        return Err(Error::EmptyInstruction);
    }
    if exemplars.len() != 2 {
        return Err(Error::MissingExemplars(exemplars.len()));
    }
    if frames.is_empty() {
        return Err(Error::InvalidFrameRefs("frame refs must be non-empty".into()));
    }
    if frames.windows(2).any(|p| p[1] != p[0] + 1) {
        return Err(Error::InvalidFrameRefs("frame refs must be contiguous".into()));
    }
    Ok(EqaPrompt {
        role_preamble: DEFAULT_ROLE_PREAMBLE.to_string(),
        exemplars: exemplars.to_vec(),
        instruction: instruction.to_string(),
        frame_refs: frames.to_vec(),
    })
}

/// Parse a raw response into its three sections. Sections are recognized by
/// their fixed headers at line starts and may appear in any order; text
/// before the first header is ignored. A missing or empty section is an
/// error naming the section.
pub fn parse_response(raw: &str) -> Result<StructuredResponse> {
    const SECTIONS: [(&str, &str); 3] = [
        (SCENE_HEADER, "scene_description"),
        (PLAN_HEADER, "path_planning"),
        (REASONING_HEADER, "commonsense"),
    ];

    let mut collected: [Option<String>; 3] = [None, None, None];
    let mut current: Option<usize> = None;
    for line in raw.lines() {
        let header = SECTIONS
            .iter()
            .position(|(h, _)| line.starts_with(h));
        if let Some(idx) = header {
            if collected[idx].is_some() {
                return Err(Error::DuplicateSection(SECTIONS[idx].1));
            }
            let rest = line[SECTIONS[idx].0.len()..].trim_start();
            collected[idx] = Some(rest.to_string());
            current = Some(idx);
        } else if let Some(idx) = current {
            let buf = collected[idx].as_mut().expect("current section is collected");
            if !buf.is_empty() {
                buf.push('\n');
            }
            buf.push_str(line);
        }
    }

    let mut take = |idx: usize| -> Result<String> {
        let text = collected[idx].take().unwrap_or_default();
        let text = text.trim().to_string();
        if text.is_empty() {
            return Err(Error::MissingSection(SECTIONS[idx].1));
        }
        Ok(text)
    };

    Ok(StructuredResponse {
        scene_description: take(0)?,
        path_planning: take(1)?,
        commonsense: take(2)?,
    })
}
