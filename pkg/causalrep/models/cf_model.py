"""Object-centric counterfactual predictor: confounder estimation plus intervened rollout."""
from __future__ import annotations

from typing import Dict

import torch
import torch.nn as nn

NUM_OBJECTS = 3
FEATURE_WIDTH = 9
STATE_WIDTH = 4
ACTION_WIDTH = 3
INTERVENTION_WIDTH = 12

# Object rows whose state the decoder advances; the goal stays static.
DYNAMIC_OBJECT_MASK = (1.0, 1.0, 0.0)


def _mlp(in_features: int, hidden: int, out_features: int) -> nn.Sequential:
	return nn.Sequential(
		nn.Linear(in_features, hidden),
		nn.SiLU(),
		nn.Linear(hidden, out_features),
		nn.SiLU(),
	)


class InteractionEncoder(nn.Module):
	"""Per-object MLP followed by one round of fully connected message passing."""

	def __init__(self, feature_width: int, hidden_size: int, num_objects: int):
		super().__init__()
		self.num_objects = num_objects
		self.object_mlp = _mlp(feature_width, hidden_size, hidden_size)
		self.edge_mlp = nn.Sequential(nn.Linear(2 * hidden_size, hidden_size), nn.SiLU())
		self.node_mlp = nn.Sequential(nn.Linear(2 * hidden_size, hidden_size), nn.SiLU())
		off_diagonal = 1.0 - torch.eye(num_objects)
		self.register_buffer("edge_mask", off_diagonal.unsqueeze(-1), persistent=False)

	def forward(self, objects: torch.Tensor) -> torch.Tensor:
		# objects: (..., K, F) -> (..., K, H)
		encoded = self.object_mlp(objects)
		k = self.num_objects
		receivers = encoded.unsqueeze(-2).expand(*encoded.shape[:-2], k, k, encoded.shape[-1])
		senders = encoded.unsqueeze(-3).expand(*encoded.shape[:-2], k, k, encoded.shape[-1])
		messages = self.edge_mlp(torch.cat([senders, receivers], dim=-1)) * self.edge_mask
		incoming = messages.sum(dim=-2)
		return self.node_mlp(torch.cat([encoded, incoming], dim=-1))


class CounterfactualModel(nn.Module):
	"""
	Encoder, confounder aggregator and rollout decoder over (effector, block, goal) object rows.

	The aggregator reads the observed trajectory and returns U; the decoder rolls the intervened
	initial state forward under the same actions, conditioned on U and the intervention encoding.
	"""

	def __init__(
			self,
			rep_width: int = 32,
			hidden_size: int = 64,
			*,
			feature_width: int = FEATURE_WIDTH,
			num_objects: int = NUM_OBJECTS,
			action_width: int = ACTION_WIDTH,
			intervention_width: int = INTERVENTION_WIDTH,
	):
		super().__init__()
		self.rep_width = rep_width
		self.hidden_size = hidden_size
		self.feature_width = feature_width
		self.num_objects = num_objects
		self.action_width = action_width
		self.intervention_width = intervention_width

		self.encoder = InteractionEncoder(feature_width, hidden_size, num_objects)
		self.aggregator = nn.GRU(hidden_size + action_width, hidden_size, batch_first=True)
		self.to_confounders = nn.Linear(hidden_size, rep_width)

		self.init_hidden = nn.Linear(rep_width, hidden_size)
		decoder_input = hidden_size + rep_width + action_width + intervention_width
		self.decoder_cell = nn.GRUCell(decoder_input, hidden_size)
		self.state_head = nn.Sequential(
			nn.Linear(2 * hidden_size, hidden_size),
			nn.SiLU(),
			nn.Linear(hidden_size, STATE_WIDTH),
		)
		nn.init.zeros_(self.state_head[-1].weight)
		nn.init.zeros_(self.state_head[-1].bias)
		mask = torch.tensor(DYNAMIC_OBJECT_MASK[:num_objects]).view(num_objects, 1)
		self.register_buffer("dynamic_mask", mask, persistent=False)

	def estimate_confounders(self, objects: torch.Tensor, actions: torch.Tensor) -> torch.Tensor:
		"""(B, T, K, F), (B, T, A) -> (B, d)."""
		pooled = self.encoder(objects).mean(dim=-2)
		_, final_hidden = self.aggregator(torch.cat([pooled, actions], dim=-1))
		return self.to_confounders(final_hidden[-1])

	def decode_step(
			self,
			state: torch.Tensor,
			hidden: torch.Tensor,
			confounders: torch.Tensor,
			action: torch.Tensor,
			intervention: torch.Tensor,
	):
		"""Advances (B, K, F) object rows by one agent step."""
		nodes = self.encoder(state)
		pooled = nodes.mean(dim=-2)
		hidden = self.decoder_cell(torch.cat([pooled, confounders, action, intervention], dim=-1), hidden)
		per_object = torch.cat([nodes, hidden.unsqueeze(-2).expand_as(nodes)], dim=-1)
		delta = self.state_head(per_object) * self.dynamic_mask
		next_state = torch.cat([state[..., :STATE_WIDTH] + delta, state[..., STATE_WIDTH:]], dim=-1)
		return next_state, hidden

	def predict_counterfactual(
			self,
			confounders: torch.Tensor,
			initial_state: torch.Tensor,
			actions: torch.Tensor,
			intervention: torch.Tensor,
	) -> torch.Tensor:
		"""(B, d), (B, K, F), (B, T, A), (B, I) -> predicted next states (B, T, K, F)."""
		hidden = torch.tanh(self.init_hidden(confounders))
		state = initial_state
		predictions = []
		for t in range(actions.shape[1]):
			state, hidden = self.decode_step(state, hidden, confounders, actions[:, t], intervention)
			predictions.append(state)
		return torch.stack(predictions, dim=1)

	def manifest(self) -> Dict[str, int]:
		return {
			"rep_width": self.rep_width,
			"hidden_size": self.hidden_size,
			"feature_width": self.feature_width,
			"num_objects": self.num_objects,
			"action_width": self.action_width,
			"intervention_width": self.intervention_width,
		}
