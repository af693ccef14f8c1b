from causalrep.models.cf_model import CounterfactualModel, InteractionEncoder
from causalrep.models.sac import Actor, Critic
