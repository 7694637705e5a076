#include <stdio.h>
#include "goalnav.h"

int main(void) {
    GnEpisode *ep = NULL;
    GnSim *sim = NULL;
    GnAgent *agent = NULL;
    if (gn_episode_generate(4, NULL, &ep) != GN_STATUS_OK) return 10;
    if (gn_sim_new(ep, &sim) != GN_STATUS_OK) return 11;
    if (gn_agent_new(ep, NULL, &agent) != GN_STATUS_OK) return 12;
    GnStepResult r = {0};
    unsigned steps = 0;
    do {
        GnAction a;
        GnPose before;
        if (gn_agent_decide(agent, sim, &a) != GN_STATUS_OK) return 13;
        gn_sim_pose(sim, &before);
        if (gn_sim_step(sim, a, &r) != GN_STATUS_OK) return 14;
        gn_agent_acknowledge(agent, before, r.collided, r.goals_found);
        steps++;
    } while (r.status == GN_EPISODE_STATUS_ONGOING);
    if (gn_sim_step(sim, GN_ACTION_TURN_LEFT, &r) != GN_STATUS_CONTRACT_VIOLATION) return 15;
    printf("%u %d %u\n", steps, (int)r.status, r.goals_found);
    gn_agent_free(agent);
    gn_sim_free(sim);
    gn_episode_free(ep);
    return 0;
}
