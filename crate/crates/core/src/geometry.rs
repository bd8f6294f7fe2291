//! Physical units and viewing geometry.

use crate::error::{Error, Result};

/// Observer distance and the physical size of one image pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewingGeometry {
    distance_cm: f64,
    pixel_pitch_cm: f64,
}

impl ViewingGeometry {
    pub fn new(distance_cm: f64, pixel_pitch_cm: f64) -> Result<Self> {
        if !(distance_cm.is_finite() && distance_cm > 0.0) {
            return Err(Error::InvalidParameter {
                name: "distance_cm",
                reason: format!("{distance_cm} must be positive"),
            });
        }
        if !(pixel_pitch_cm.is_finite() && pixel_pitch_cm > 0.0) {
            return Err(Error::InvalidParameter {
                name: "pixel_pitch_cm",
                reason: format!("{pixel_pitch_cm} must be positive"),
            });
        }
        Ok(Self {
            distance_cm,
            pixel_pitch_cm,
        })
    }

    /// Geometry for a print of `size_cm` mapped onto `pixels` samples.
    pub fn for_print(distance_cm: f64, size_cm: f64, pixels: usize) -> Result<Self> {
        Self::new(distance_cm, size_cm / pixels as f64)
    }

    #[inline]
    pub fn distance_cm(&self) -> f64 {
        self.distance_cm
    }

    #[inline]
    pub fn pixel_pitch_cm(&self) -> f64 {
        self.pixel_pitch_cm
    }

    #[inline]
    pub fn cm_to_px(&self, length_cm: f64) -> f64 {
        length_cm / self.pixel_pitch_cm
    }

    #[inline]
    pub fn px_to_cm(&self, length_px: f64) -> f64 {
        length_px * self.pixel_pitch_cm
    }

    /// Angle subtended at the eye by an extent centred on the line of sight.
    pub fn visual_angle_deg(&self, extent_cm: f64) -> f64 {
        visual_angle_deg(extent_cm, self.distance_cm)
    }
}

/// `2·atan(extent / (2·distance))`, in degrees.
pub fn visual_angle_deg(extent_cm: f64, distance_cm: f64) -> f64 {
    (2.0 * (extent_cm / (2.0 * distance_cm)).atan()).to_degrees()
}

/// Frame count and rate of a generated sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceSpec {
    frame_count: usize,
    fps: f64,
}

impl SequenceSpec {
    pub fn new(frame_count: usize, fps: f64) -> Result<Self> {
        if frame_count == 0 {
            return Err(Error::InvalidParameter {
                name: "frame_count",
                reason: "must be at least 1".into(),
            });
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidParameter {
                name: "fps",
                reason: format!("{fps} must be positive"),
            });
        }
        Ok(Self { frame_count, fps })
    }

    #[inline]
    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    #[inline]
    pub fn fps(&self) -> f64 {
        self.fps
    }

    /// Timestamp of frame `k` in seconds.
    #[inline]
    pub fn time_of(&self, k: usize) -> f64 {
        k as f64 / self.fps
    }

    /// Number of whole frames in one second, if `fps` is integral.
    pub fn frames_per_second(&self) -> Result<usize> {
        if self.fps.fract() != 0.0 {
            return Err(Error::NonIntegerSegment { fps: self.fps });
        }
        Ok(self.fps as usize)
    }
}
