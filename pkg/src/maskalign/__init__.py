"""Training-free open-vocabulary and referring segmentation over mask
proposals, driven by pluggable vision-language encoders."""

__version__ = "0.1.0"

from .masks import MaskProposal, MaskSet, mask_iou, merge_masks
from .geometry import OrientedBox, compute_mbr, expand_box
from .cropping import CROP_VARIANTS, CropConfig, crop_patch
from .text import (ClassVocabulary, DecoupledExpression, RuleBasedTagger,
                   TaggedToken, decouple, decouple_expression, parse_expression)
from .prompts import (BACKGROUND, ClassTextBank, PromptEntry, build_bank,
                      load_bank, load_packaged_bank, render_prompts)
from .encoders import (MockEmbeddingEncoder, MockSaliencyEncoder,
                       ProbabilityMatrix, TensorFileAdapter, TokenSaliency,
                       classify, embed_images, embed_texts, patch_digest,
                       token_saliency, write_tensor_file)
from .saliency import (PeakSet, SaliencyMap, activation_difference,
                       enhance_global, find_local_maxima, fuse,
                       fuse_expression_maps, group_gradcam, minmax_normalize)
from .alignment import (LabeledMask, SegmentationResult, assemble_ovss,
                        classify_masks, extract_local_features)
from .selection import (ScoredMask, SelectionResult, activated_masks,
                        intersect_candidates, score_masks, select_global,
                        select_referred)
from .evaluation import (EvalReport, GtInstance, format_report,
                         image_level_miou, proposal_miou, split_report)
from .proposals import (ProposalSource, SceneSpec, ShapeSpec, load_proposals,
                        save_proposals, synth_scene, synthetic_masks)
from .pipeline import PipelineConfig, load_config, run_ablation, run_ovss, run_res
