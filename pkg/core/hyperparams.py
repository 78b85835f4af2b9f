# core/hyperparams.py - Validated hyperparameter models
from typing import List, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator


class ArchitectureConfig(BaseModel):
    """Layer widths; defaults are the 4-layer autoencoder / 2-layer GCN of the reference setup"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    hidden_dims: List[int] = Field(default_factory=lambda: [500, 500, 2000])
    latent_dim: int = 64
    gcn_dims: List[int] = Field(default_factory=lambda: [128, 64])
    dtype: Literal["float32", "float64"] = "float32"

    @field_validator('hidden_dims', 'gcn_dims')
    def validate_widths(cls, v):
        if not v or any(width < 1 for width in v):
            raise ValueError('layer widths must be positive and non-empty')
        return v

    @field_validator('latent_dim')
    def validate_latent_dim(cls, v):
        if v < 1:
            raise ValueError('latent_dim must be positive')
        return v


class CslConfig(BaseModel):
    """Consensus semantic learning: softmax temperature, transport smoothness"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    temperature: float = 0.1
    alpha: float = 0.5
    sinkhorn_iters: int = 3
    prototype_space: Literal["semantic", "latent"] = "semantic"

    @field_validator('temperature')
    def validate_temperature(cls, v):
        if not 0.0 < v <= 1.0:
            raise ValueError('temperature must lie in (0, 1]')
        return v

    @field_validator('alpha')
    def validate_alpha(cls, v):
        if v <= 0:
            raise ValueError('alpha must be positive')
        return v

    @field_validator('sinkhorn_iters')
    def validate_iters(cls, v):
        if v < 1:
            raise ValueError('sinkhorn_iters must be at least 1')
        return v


class CseConfig(BaseModel):
    """Cluster semantic enhancement: KNN size, KL weight, Student's-t degrees of freedom"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    neighbors: int = 3
    kl_weight: float = 0.1
    t_dof: float = 1.0

    @field_validator('neighbors')
    def validate_neighbors(cls, v):
        if v < 1:
            raise ValueError('neighbors must be at least 1')
        return v

    @field_validator('kl_weight')
    def validate_kl_weight(cls, v):
        if v < 0:
            raise ValueError('kl_weight must be non-negative')
        return v

    @field_validator('t_dof')
    def validate_t_dof(cls, v):
        if v <= 0:
            raise ValueError('t_dof must be positive')
        return v


class TrainConfig(BaseModel):
    """Two-stage training schedule and ablation switches"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    warmup_epochs: int = 100
    finetune_epochs: int = 100
    batch_size: int = 512
    lr_warmup: float = 3e-4
    lr_finetune: float = 5e-4
    seed: int = 0
    kmeans_n_init: int = 10
    csl: CslConfig = Field(default_factory=CslConfig)
    cse: CseConfig = Field(default_factory=CseConfig)
    architecture: ArchitectureConfig = Field(default_factory=ArchitectureConfig)
    use_cc: bool = True
    use_gc: bool = True

    @field_validator('warmup_epochs', 'finetune_epochs')
    def validate_epochs(cls, v):
        if v < 0:
            raise ValueError('epoch counts must be non-negative')
        return v

    @field_validator('batch_size', 'kmeans_n_init')
    def validate_positive_count(cls, v):
        if v < 1:
            raise ValueError('must be at least 1')
        return v

    @field_validator('lr_warmup', 'lr_finetune')
    def validate_lr(cls, v):
        if v <= 0:
            raise ValueError('learning rates must be positive')
        return v

    @property
    def ablation_tag(self) -> str:
        """Component tag used in result tables, e.g. 'rec+cc+gc'"""
        parts = ["rec"]
        if self.use_cc:
            parts.append("cc")
        if self.use_gc:
            parts.append("gc")
        return "+".join(parts)
