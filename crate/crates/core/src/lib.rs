pub mod color;
pub mod dynamics;
pub mod render;
pub mod scene;
pub mod gallery;
