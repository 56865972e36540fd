//! Bug-fix corpus mining: commit filtering, method extraction and
//! normalization.

mod mine;
mod normalize;

pub use mine::{
    extract_edit_pairs, filter_fix_commits, is_fix_message, read_history, CommitRef, EditPairRecord,
    ExtractReport, FileTree, GitRepo, MethodEditPair, MethodRecord, MineError,
};
pub use normalize::{normalize, NUM_PLACEHOLDER, STR_PLACEHOLDER};
