from __future__ import annotations

from typing import Optional, Sequence, Tuple

import torch
import torch.nn as nn
from torch.distributions.normal import Normal

LOG_STD_BOUNDS = (-20.0, 2.0)
# Keeps log(1 - tanh^2) finite at the squashing boundary.
SQUASH_EPSILON = 1e-6


def _trunk(in_features: int, hidden_sizes: Sequence[int]) -> Tuple[nn.Sequential, int]:
	layers = []
	width = in_features
	for hidden in hidden_sizes:
		layers.extend([nn.Linear(width, hidden), nn.ReLU()])
		width = hidden
	return nn.Sequential(*layers), width


class Actor(nn.Module):
	"""Tanh-squashed Gaussian policy."""

	def __init__(self, obs_width: int, action_width: int, hidden_sizes: Sequence[int] = (64, 64)):
		super().__init__()
		self.trunk, width = _trunk(obs_width, hidden_sizes)
		self.mu = nn.Linear(width, action_width)
		self.log_std = nn.Linear(width, action_width)

	def forward(self, obs: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
		features = self.trunk(obs)
		log_std = torch.clamp(self.log_std(features), *LOG_STD_BOUNDS)
		return self.mu(features), log_std

	def deterministic(self, obs: torch.Tensor) -> torch.Tensor:
		mu, _ = self.forward(obs)
		return torch.tanh(mu)

	def sample(self, obs: torch.Tensor, generator: Optional[torch.Generator] = None) -> Tuple[torch.Tensor, torch.Tensor]:
		"""Reparameterized action and its log-probability under the squashed distribution."""
		mu, log_std = self.forward(obs)
		std = log_std.exp()
		noise = torch.randn(mu.shape, generator=generator, dtype=mu.dtype, device=mu.device)
		pre_tanh = mu + std * noise
		action = torch.tanh(pre_tanh)
		log_prob = Normal(mu, std).log_prob(pre_tanh)
		log_prob = log_prob - torch.log(1.0 - action.pow(2) + SQUASH_EPSILON)
		return action, log_prob.sum(dim=-1, keepdim=True)


class Critic(nn.Module):
	"""Q(s, a)."""

	def __init__(self, obs_width: int, action_width: int, hidden_sizes: Sequence[int] = (64, 64)):
		super().__init__()
		self.trunk, width = _trunk(obs_width + action_width, hidden_sizes)
		self.q = nn.Linear(width, 1)

	def forward(self, obs: torch.Tensor, action: torch.Tensor) -> torch.Tensor:
		return self.q(self.trunk(torch.cat([obs, action], dim=-1)))
