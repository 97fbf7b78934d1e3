"""PPO, world-model regression and policy distillation."""
