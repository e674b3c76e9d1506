//! Check orchestration (under construction).
