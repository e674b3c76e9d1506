//! Descent-cocycle machinery (under construction).
