from .tokenize import (
    FLAG_INDEX,
    TOKEN_DIM,
    TOKEN_LAYOUT_VERSION,
    ContextTooLong,
    context_token,
    detokenize,
    query_token,
    tokenize,
)
from .model import DptConfig, DptModel
from .dataset import (
    DatasetGenConfig,
    PretrainingSample,
    generate_pretraining_dataset,
    load_dataset,
    save_dataset,
)
from .pretrain import DptTrainConfig, PretrainDiverged, build_token_batch, pretrain
from .deploy import (
    ContextBuffer,
    DeployConfig,
    deploy_online,
    predict_action,
    predict_actions_batch,
)

__all__ = [
    "FLAG_INDEX", "TOKEN_DIM", "TOKEN_LAYOUT_VERSION", "ContextTooLong",
    "context_token", "detokenize", "query_token", "tokenize", "DptConfig",
    "DptModel", "DatasetGenConfig", "PretrainingSample",
    "generate_pretraining_dataset", "load_dataset", "save_dataset",
    "DptTrainConfig", "PretrainDiverged", "build_token_batch", "pretrain",
    "ContextBuffer", "DeployConfig", "deploy_online", "predict_action",
    "predict_actions_batch",
]
