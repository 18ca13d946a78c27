//! Row-major single-channel f32 raster shared by depth maps, error maps and
//! BEV channels. NaN marks an invalid cell.

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: u32,
    height: u32,
    values: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("raster of {width}x{height} needs {} values, got {got}", *width as usize * *height as usize)]
pub struct ShapeError {
    pub width: u32,
    pub height: u32,
    pub got: usize,
}

impl Raster {
    pub fn new(width: u32, height: u32, values: Vec<f32>) -> Result<Self, ShapeError> {
        if values.len() != width as usize * height as usize {
            return Err(ShapeError { width, height, got: values.len() });
        }
        Ok(Raster { width, height, values })
    }

    pub fn filled(width: u32, height: u32, value: f32) -> Self {
        Raster { width, height, values: vec![value; width as usize * height as usize] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn index(&self, col: u32, row: u32) -> usize {
        row as usize * self.width as usize + col as usize
    }

    pub fn get(&self, col: u32, row: u32) -> f32 {
        self.values[self.index(col, row)]
    }

    pub fn set(&mut self, col: u32, row: u32, v: f32) {
        let i = self.index(col, row);
        self.values[i] = v;
    }

    pub fn same_shape(&self, other: &Raster) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_finite()).count()
    }
}
