#![allow(dead_code)]

pub mod groups;
pub mod oracle;
