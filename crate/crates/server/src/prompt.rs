//! Prompt sent to the program generator: a versioned template with the
//! reference example programs spliced in.

use strata_core::vpdsl::CORPUS;

pub const PROMPT_VERSION: &str = "v1";
const TEMPLATE: &str = include_str!("../prompt/template_v1.txt");
const SLOT: &str = "{{EXAMPLES}}";

/// Each example appears exactly once, verbatim, preceded by a one-line
/// description.
pub fn assemble_prompt() -> String {
    let examples: Vec<String> = CORPUS
        .iter()
        .map(|ex| format!("Example {} ({}):\n{}\n", ex.number, ex.summary, ex.raw))
        .collect();
    TEMPLATE.replacen(SLOT, &examples.join("\n"), 1)
}
