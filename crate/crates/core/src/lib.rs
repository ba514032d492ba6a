//! Two-method analysis of interactions between the 169 SDG targets.
//!
//! Expert survey scores and indicator correlations are reduced to
//! [`EvaluationStore`]s, which the analytics turn into graphs, verdicts,
//! statistics and a combined synthesis.

pub mod analytics;
pub mod catalog;
pub mod correlation;
pub mod evaluation;
pub mod ingest;
pub mod report;
pub mod survey;

pub use analytics::{
    beauty_ranking, graph_query, intra_goal_report, style_edge, summary_stats, synthesize,
    ugliness_ranking, verdicts, AnalyticsError, Bucket, Edge, EdgeStatus, EdgeStyle, GraphDocument,
    Hue, IntraGoalReport, Percent, SummaryStats, SynthesisConfig, SynthesisReport, TargetVerdict,
};
pub use catalog::{Catalog, CatalogError, GoalId, TargetId, TargetPair, PAIR_COUNT};
pub use correlation::{
    classify, run_indicator_method, spearman, spearman_rho, Coefficient, CorrelationConfig,
    IndicatorResults, InteractionClass,
};
pub use evaluation::{
    read_expert_answers, EdgeValue, EvaluationStore, ExpertAnswer, ExpertScore, Method, ScaleLabel,
};
pub use ingest::{load_indicator_file, load_indicators, IndicatorId, IndicatorSeries};
