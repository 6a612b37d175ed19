/// Counters accumulated while evaluating obstacles.
///
/// Each work item owns its own instance; totals are combined with
/// [`Diagnostics::merge`] so the result does not depend on scheduling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// Calls into a Fresnel integral evaluator.
    pub fresnel_evaluations: u64,
    /// Segments for which a diffraction model was evaluated.
    pub diffraction_evaluations: u64,
    /// Segments resolved with the constant obstruction model.
    pub obstruction_evaluations: u64,
    /// Losses clamped to the cap, or METIS log arguments clamped.
    pub clamp_events: u64,
    /// Segments skipped because of degenerate geometry.
    pub degenerate_segments: u64,
    /// Rays dropped for falling below the removal floor.
    pub rays_dropped: u64,
}

impl Diagnostics {
    pub fn merge(&mut self, other: &Diagnostics) {
        self.fresnel_evaluations += other.fresnel_evaluations;
        self.diffraction_evaluations += other.diffraction_evaluations;
        self.obstruction_evaluations += other.obstruction_evaluations;
        self.clamp_events += other.clamp_events;
        self.degenerate_segments += other.degenerate_segments;
        self.rays_dropped += other.rays_dropped;
    }
}
