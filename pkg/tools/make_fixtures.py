#!/usr/bin/env python3
"""Build and verify the sentinel.lab engagement fixtures.

Produces, under src/refpt/fixtures/:

  sentinel.records.jsonl          three-tier knowledge corpus
  sentinel.scenario.json          six-flag gated sim target
  sentinel.llm_script.json        scripted backend: clean 6/6 run
  sentinel_degraded.llm_script.json  same run until the last capture stalls out
  sentinel.plan.json              operator plan for the clean run
  sentinel_degraded.plan.json     operator plan for the degraded run

The script is its own oracle: before writing anything it runs both variants
through the real engine and asserts the stage walk, the action selections,
the reward sequence and the exact hand-computed occupancy metrics. A fixture
that drifts from the engine fails here, not in the test suite.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from refpt.knowledge_base import (  # noqa: E402
    embed_and_index,
    ingest_records,
    write_records,
)
from refpt.llm_gateway import HashEmbedder  # noqa: E402
from refpt.orchestrator import (  # noqa: E402
    BackendConfig,
    Session,
    SessionConfig,
    load_plan,
    run_plan,
)
from refpt.sim_target import ScriptedTarget  # noqa: E402

HOST = "sentinel.lab"
EMBEDDER = "hash-v1-256"
LAMBDA = 0.45
FLAGS_TOTAL = 6

# --- knowledge corpus ---------------------------------------------------------

# Retrieval note: the stock embedder is an exact-token bag model, so every
# description below is telegraphic — content tokens only, phrased in the same
# forms the operator instructions use, with each tactic keeping a vocabulary
# the other tactics do not share.
RAW_ENTRIES = [
    # tactics
    {"tier": "tactic", "id": "TA0043", "name": "Reconnaissance",
     "source": "attack_matrix",
     "description": "sweeping perimeter ports; fingerprint exposed software "
                    "builds; probe administrative interfaces, hidden status "
                    "pages; inventory endpoints, listeners; locate shares, "
                    "exports, reachable network; map database bind addresses; "
                    "identify services"},
    {"tier": "tactic", "id": "TA0007", "name": "Discovery",
     "source": "attack_matrix",
     "description": "enumerate versions against known weakness lists; walk "
                    "repository history, old commits; exercise debug console "
                    "features, bypass; test weak authentication surface, "
                    "logins; sift readable contents, files; review "
                    "configuration exposure"},
    {"tier": "tactic", "id": "TA0001", "name": "Initial Access",
     "source": "attack_matrix",
     "description": "render hostile template upload handler, gain execution; "
                    "log in, recovered password; forge privileged admin "
                    "endpoint; authenticate, stock plane; download openly "
                    "shared bundle, offline inspection; connect "
                    "unauthenticated socket, issue queries"},
    {"tier": "tactic", "id": "TA0004", "name": "Privilege Escalation",
     "source": "attack_matrix",
     "description": "audit available sudo rules; inspect scheduled jobs, "
                    "modify; list granted scopes, forged; trace privileges, "
                    "workers, run jobs; assume operator role, exported; "
                    "promote writable superuser connection"},
    {"tier": "tactic", "id": "TA0006", "name": "Credential Access",
     "source": "attack_matrix",
     "description": "read protected secrets file, elevated helper; extract "
                    "credential material, sync job environment; dump captured "
                    "store scope; export unlocked keyring api; pull master "
                    "secrets, credential table, promoted; retry corrected "
                    "names, search schema, likely credentials, holding; user "
                    "table serve"},
    {"tier": "tactic", "id": "PTX-DOC", "name": "Reporting",
     "source": "custom", "perspective": "pentester",
     "description": "record evidence, findings, working path; engagement "
                    "report; close out documentation"},
    {"tier": "tactic", "id": "TA0011", "name": "Command and Control",
     "source": "attack_matrix",
     "description": "maintain covert channels, compromised machines; tunnels, "
                    "beacons, relay infrastructure"},

    # techniques: reconnaissance
    {"tier": "technique", "id": "T1595", "parent": "TA0043",
     "name": "Active Scanning", "source": "attack_matrix",
     "description": "sweeping perimeter ports, note answers, identify "
                    "services; probe administrative interfaces, hidden status "
                    "pages; locate shares, exports, reachable network"},
    {"tier": "technique", "id": "T1592", "parent": "TA0043",
     "name": "Gather Victim Host Information", "source": "attack_matrix",
     "description": "fingerprint exposed software builds, banners, host; "
                    "inventory broker endpoints, management listeners; map "
                    "database replica listeners, bind addresses"},
    # techniques: discovery
    {"tier": "technique", "id": "T1046", "parent": "TA0007",
     "name": "Network Service Discovery", "source": "attack_matrix",
     "description": "enumerate service versions against known weakness "
                    "lists; test weak authentication surface, vendor default "
                    "logins"},
    {"tier": "technique", "id": "T1083", "parent": "TA0007",
     "name": "File and Directory Discovery", "source": "attack_matrix",
     "description": "walk repository history, passwords, old commits; list "
                    "directories, stale files, leftovers; sift share "
                    "contents, readable dumps, key files"},
    {"tier": "technique", "id": "T1518", "parent": "TA0007",
     "name": "Software Discovery", "source": "attack_matrix",
     "description": "exercise debug console features, bypass authentication "
                    "checks; review replica configuration, exposure"},
    # techniques: initial access
    {"tier": "technique", "id": "T1190", "parent": "TA0001",
     "name": "Exploit Public-Facing Application", "source": "attack_matrix",
     "description": "render hostile template upload handler, gain execution; "
                    "forge privileged admin token, debug endpoint"},
    {"tier": "technique", "id": "T1133", "parent": "TA0001",
     "name": "External Remote Services", "source": "attack_matrix",
     "description": "log in, deploy service, recovered password; download "
                    "openly shared archive bundle, offline inspection; "
                    "connect unauthenticated replica socket, issue queries"},
    {"tier": "technique", "id": "T1078", "parent": "TA0001",
     "name": "Valid Accounts", "source": "attack_matrix",
     "description": "authenticate management plane, stock vendor default "
                    "guest account"},
    # techniques: privilege escalation
    {"tier": "technique", "id": "T1548", "parent": "TA0004",
     "name": "Abuse Elevation Control Mechanism", "source": "attack_matrix",
     "description": "audit available sudo rules, service account; list "
                    "granted scopes, forged session token"},
    {"tier": "technique", "id": "T1053", "parent": "TA0004",
     "name": "Scheduled Task/Job", "source": "attack_matrix",
     "description": "inspect scheduled jobs, reach, modify; trace queue "
                    "workers privileges, run jobs"},
    {"tier": "technique", "id": "T1068", "parent": "TA0004",
     "name": "Exploitation for Privilege Escalation", "source": "attack_matrix",
     "description": "assume backup operator role, exported key material; "
                    "promote replica connection, writable superuser session"},
    # techniques: credential access
    {"tier": "technique", "id": "T1552", "parent": "TA0006",
     "name": "Unsecured Credentials", "source": "attack_matrix",
     "description": "read protected secrets file, elevated backup helper; "
                    "extract credential material, privileged sync job "
                    "environment; dump token store, captured read scope; "
                    "export broker keyring, unlocked management api; pull "
                    "master secrets, archive key vault; pull credential "
                    "table, promoted replica session; retry corrected table "
                    "names, search schema, credentials"},
    {"tier": "technique", "id": "T1110", "parent": "TA0006",
     "name": "Brute Force", "source": "attack_matrix",
     "description": "spray common passwords against accounts, guessing"},
    # techniques: reporting + distractor
    {"tier": "technique", "id": "PTX-DOC-01", "parent": "PTX-DOC",
     "name": "Engagement Reporting", "source": "custom",
     "perspective": "pentester",
     "description": "record evidence, findings, working path; engagement "
                    "report; close out documentation"},
    {"tier": "technique", "id": "T1571", "parent": "TA0011",
     "name": "Non-Standard Port", "source": "attack_matrix",
     "description": "communicate over unexpected protocol, port pairings; "
                    "evade egress filters"},

    # actions: reconnaissance
    {"tier": "action", "id": "OTG-REC-001", "parent": "T1595",
     "name": "Sweep Service Ports", "source": "testing_guide",
     "description": "sweeping perimeter ports; note answers; identify "
                    "exposed services"},
    {"tier": "action", "id": "OTG-REC-002", "parent": "T1592",
     "name": "Fingerprint Exposed Software", "source": "testing_guide",
     "description": "fingerprint software builds, banners exposed; host "
                    "listeners"},
    {"tier": "action", "id": "OTG-REC-003", "parent": "T1595",
     "name": "Probe Administrative Interfaces", "source": "testing_guide",
     "description": "probe administrative interfaces, hidden status pages"},
    {"tier": "action", "id": "OTG-REC-004", "parent": "T1592",
     "name": "Inventory Broker Endpoints", "source": "testing_guide",
     "description": "inventory broker endpoints, management listeners"},
    {"tier": "action", "id": "OTG-REC-005", "parent": "T1595",
     "name": "Locate Backup Shares", "source": "testing_guide",
     "description": "locate backup shares, archive exports, reachable "
                    "network"},
    {"tier": "action", "id": "OTG-REC-006", "parent": "T1592",
     "name": "Map Database Replicas", "source": "testing_guide",
     "description": "map database replica listeners, bind addresses"},

    # actions: discovery
    {"tier": "action", "id": "OTG-DIS-001", "parent": "T1046",
     "name": "Enumerate Service Versions", "source": "testing_guide",
     "description": "enumerate service versions against known weakness "
                    "lists"},
    {"tier": "action", "id": "OTG-DIS-002", "parent": "T1083",
     "name": "Review Repository History", "source": "testing_guide",
     "description": "walk repository history, passwords, old commits"},
    {"tier": "action", "id": "OTG-DIS-003", "parent": "T1083",
     "name": "List Repository Directories", "source": "testing_guide",
     "description": "list repository directories, stale files left behind, "
                    "leftovers"},
    {"tier": "action", "id": "OTG-DIS-004", "parent": "T1518",
     "name": "Probe Debug Consoles", "source": "testing_guide",
     "description": "exercise debug console features, bypass authentication "
                    "checks"},
    {"tier": "action", "id": "OTG-DIS-005", "parent": "T1046",
     "name": "Test Authentication Surfaces", "source": "testing_guide",
     "description": "test weak authentication surface, vendor default "
                    "logins"},
    {"tier": "action", "id": "OTG-DIS-006", "parent": "T1083",
     "name": "Inspect Share Contents", "source": "testing_guide",
     "description": "sift share contents, readable dumps, key files"},
    {"tier": "action", "id": "OTG-DIS-007", "parent": "T1518",
     "name": "Audit Replica Configuration", "source": "testing_guide",
     "description": "review replica configuration, exposure, authentication "
                    "missing"},

    # actions: initial access
    {"tier": "action", "id": "OTG-EXP-001", "parent": "T1190",
     "name": "Abuse Template Upload", "source": "testing_guide",
     "description": "render hostile template upload handler, gain "
                    "execution"},
    {"tier": "action", "id": "OTG-EXP-002", "parent": "T1133",
     "name": "Authenticate With Leaked Password", "source": "testing_guide",
     "description": "log in, deploy service, recovered password"},
    {"tier": "action", "id": "OTG-EXP-003", "parent": "T1190",
     "name": "Forge Debug Session Token", "source": "testing_guide",
     "description": "forge privileged admin token, debug endpoint"},
    {"tier": "action", "id": "OTG-EXP-004", "parent": "T1078",
     "name": "Use Default Vendor Account", "source": "testing_guide",
     "description": "authenticate management plane, stock vendor default "
                    "account"},
    {"tier": "action", "id": "OTG-EXP-005", "parent": "T1133",
     "name": "Fetch Exposed Archive", "source": "testing_guide",
     "description": "download openly shared archive bundle, offline "
                    "inspection"},
    {"tier": "action", "id": "OTG-EXP-006", "parent": "T1133",
     "name": "Attach To Open Replica", "source": "testing_guide",
     "description": "connect unauthenticated replica socket, issue "
                    "queries"},

    # actions: privilege escalation
    {"tier": "action", "id": "OTG-PRV-001", "parent": "T1548",
     "name": "Audit Sudo Rules", "source": "testing_guide",
     "description": "audit available sudo rules, service account"},
    {"tier": "action", "id": "OTG-PRV-002", "parent": "T1053",
     "name": "Inspect Scheduled Jobs", "source": "testing_guide",
     "description": "inspect scheduled jobs, account reach, modify"},
    {"tier": "action", "id": "OTG-PRV-003", "parent": "T1548",
     "name": "Enumerate Token Scopes", "source": "testing_guide",
     "description": "list granted scopes, forged session token"},
    {"tier": "action", "id": "OTG-PRV-004", "parent": "T1053",
     "name": "Trace Worker Privileges", "source": "testing_guide",
     "description": "trace queue workers privileges, run jobs"},
    {"tier": "action", "id": "OTG-PRV-005", "parent": "T1068",
     "name": "Assume Backup Operator", "source": "testing_guide",
     "description": "assume backup operator role, exported key material"},
    {"tier": "action", "id": "OTG-PRV-006", "parent": "T1068",
     "name": "Promote Replica Session", "source": "testing_guide",
     "description": "promote replica connection, writable superuser "
                    "session"},

    # actions: credential access
    {"tier": "action", "id": "OTG-CRD-001", "parent": "T1552",
     "name": "Read Protected Secrets File", "source": "testing_guide",
     "description": "read protected secrets file, elevated backup helper"},
    {"tier": "action", "id": "OTG-CRD-002", "parent": "T1552",
     "name": "Extract Job Environment Credential", "source": "testing_guide",
     "description": "extract credential material, privileged sync job "
                    "environment"},
    {"tier": "action", "id": "OTG-CRD-003", "parent": "T1552",
     "name": "Dump Token Store", "source": "testing_guide",
     "description": "dump token store, captured read scope"},
    {"tier": "action", "id": "OTG-CRD-004", "parent": "T1552",
     "name": "Export Broker Keyring", "source": "testing_guide",
     "description": "export broker keyring, unlocked management api"},
    {"tier": "action", "id": "OTG-CRD-005", "parent": "T1552",
     "name": "Open Archive Key Vault", "source": "testing_guide",
     "description": "pull master secrets, archive key vault, backup "
                    "operator"},
    {"tier": "action", "id": "OTG-CRD-006", "parent": "T1552",
     "name": "Pull Replica Credential Table", "source": "testing_guide",
     "description": "pull credential table, promoted replica session; retry "
                    "corrected likely table names, search schema, "
                    "credentials; dump user table serve"},
    {"tier": "action", "id": "OTG-CRD-D01", "parent": "T1110",
     "name": "Spray Common Passwords", "source": "testing_guide",
     "description": "spray common passwords against accounts, guessing"},

    # actions: reporting + distractor
    {"tier": "action", "id": "OTG-DOC-001", "parent": "PTX-DOC-01",
     "name": "Record Stage Evidence", "source": "custom",
     "perspective": "pentester",
     "description": "record evidence, working path, engagement report, "
                    "close documentation"},
    {"tier": "action", "id": "OTG-C2-001", "parent": "T1571",
     "name": "Tunnel Over Uncommon Port", "source": "testing_guide",
     "description": "wrap control channel, uncommon port traffic"},
]


# --- engagement script ----------------------------------------------------------
#
# One row per acting iteration. The walk repeats six times, once per planted
# flag, and three deliberate detours exercise every reward branch:
#   flag 1 reconnaissance takes two iterations (the first sweep is partial),
#   flag 1 exploitation needs regenerated guidance (r=1),
#   flag 2 discovery picks a wrong action first (r=0), then proposes a new one.
# The degraded variant replays flags 1-5 and then fails the last capture five
# times in a row, stalling the machine into the terminal stage.

STAGES = ["recon", "vuln", "exploit", "post", "ctf", "doc"]
STAGE_VALUE = {
    "recon": "information_gathering",
    "vuln": "vulnerability_identification",
    "exploit": "exploitation",
    "post": "post_exploitation",
    "ctf": "capture_the_flag",
    "doc": "documentation",
}
GOAL = {
    "recon": "gathered_information",
    "vuln": "identified_vulnerability",
    "exploit": "exploited",
    "post": "post_exploited",
    "ctf": "flag_captured",
    "doc": "documented",
}

CYCLES = [
    {
        "tag": "c1",
        "flag": "FLAG{portal-template-rce}",
        "recon": {
            "q": "continue sweeping the perimeter ports of sentinel and identify "
                 "all exposed services",
            "action": "OTG-REC-001",
            "explanation": "Version-scan the full port range of the target.",
            "command": "nmap -sV -p- sentinel.lab",
            "output": "[c1-recon-b] full sweep: 22 ssh, 80 portal http "
                      "(webstack 3.1 with template upload module), 8443 mgmt",
        },
        "vuln": {
            "q": "enumerate the portal service versions against known weakness "
                 "lists",
            "action": "OTG-DIS-001",
            "explanation": "Match the discovered versions against weakness lists.",
            "command": "vulnscan --service portal --host sentinel.lab",
            "output": "[c1-vuln] webstack 3.1 template engine renders uploaded "
                      "templates without sandboxing",
        },
        "exploit": {
            "q": "render a hostile template through the portal upload handler "
                 "to gain execution",
            "action": "OTG-EXP-001",
            "explanation": "Upload and render a template that spawns a shell.",
            "command": "upload-template --render shell.tpl --host sentinel.lab",
            "output": "[c1-shell] template rendered; interactive uid=33(www-data) "
                      "shell on the portal worker",
        },
        "post": {
            "q": "audit the sudo rules available to the portal service account",
            "action": "OTG-PRV-001",
            "explanation": "List sudo rules for the web service user.",
            "command": "sudo -l -U www-data",
            "output": "[c1-priv] www-data may run backupctl as root without a "
                      "password",
        },
        "ctf": {
            "q": "read the protected portal secrets file with the elevated "
                 "backup helper",
            "action": "OTG-CRD-001",
            "explanation": "Use the root-capable helper to read the secrets file.",
            "command": "backupctl cat /etc/portal/secrets.env",
            "output": "[c1-flag] secrets.env leaked FLAG{portal-template-rce}",
        },
        "doc": {
            "q": "record the portal evidence and the working path in the "
                 "engagement report",
            "manual": "[c1-doc] Logged the portal template chain and "
                      "FLAG{portal-template-rce} in the report.",
        },
    },
    {
        "tag": "c2",
        "flag": "FLAG{mirror-deploy-cred}",
        "recon": {
            "q": "fingerprint the software builds exposed by the mirror host",
            "action": "OTG-REC-002",
            "explanation": "Grab banners from the mirror's listeners.",
            "command": "banner-grab sentinel.lab --ports 22,9418,8081",
            "output": "[c2-recon] mirror speaks git protocol on 9418 and serves "
                      "gitweb 2.4 on 8081",
        },
        "vuln": {
            "q": "walk the mirror repository history for passwords left behind "
                 "in old commits",
            "action": "OTG-DIS-003",  # deliberate miss; renavigated below
            "explanation": "List the repository working directories.",
            "command": "mirror-ls /srv/mirror",
            "output": "[c2-miss] mirror directory listing shows only clean "
                      "build artifacts",
        },
        "vuln_retry": {
            "new_action_text": "review the newest mirror commits for leaked "
                               "deploy credentials",
            "explanation": "Read the most recent commits with full patches.",
            "command": "git-mirror log --patch -3 /srv/mirror/app",
            "output": "[c2-vuln] commit 8f2c adds DEPLOY_PASS=winter2graphite "
                      "in ci.env",
            "phi": "listing directories inspects the working tree, not the "
                   "commit history where the secret was left",
        },
        "exploit": {
            "q": "log in to the mirror deploy service with the recovered "
                 "password",
            "action": "OTG-EXP-002",
            "explanation": "Authenticate as deploy with the leaked password.",
            "command": "ssh deploy@sentinel.lab -p 2222",
            "output": "[c2-shell] deploy@sentinel.lab accepted the leaked "
                      "password; build shell opened",
        },
        "post": {
            "q": "inspect the scheduled jobs the deploy account can reach and "
                 "modify",
            "action": "OTG-PRV-002",
            "explanation": "List the deploy user's cron entries.",
            "command": "crontab -l -u deploy",
            "output": "[c2-priv] deploy owns a root-run sync job whose script "
                      "is writable",
        },
        "ctf": {
            "q": "extract the credential material from the privileged sync job "
                 "environment",
            "action": "OTG-CRD-002",
            "explanation": "Dump the environment file the sync job sources.",
            "command": "sync-env --dump /etc/mirror/sync.env",
            "output": "[c2-flag] sync.env holds FLAG{mirror-deploy-cred}",
        },
        "doc": {
            "q": "record the mirror evidence and the leaked commit path in the "
                 "report",
            "manual": "[c2-doc] Logged the mirror commit leak chain and "
                      "FLAG{mirror-deploy-cred} in the report.",
        },
    },
    {
        "tag": "c3",
        "flag": "FLAG{vault-debug-token}",
        "recon": {
            "q": "probe the vault service for administrative interfaces and "
                 "hidden status pages",
            "action": "OTG-REC-003",
            "explanation": "Probe the vault's http surface for admin paths.",
            "command": "webprobe http://sentinel.lab:8200 --paths admin,status,debug",
            "output": "[c3-recon] vault exposes /v1/sys/status and an unlinked "
                      "/debug console",
        },
        "vuln": {
            "q": "exercise the vault debug console for features that bypass "
                 "authentication",
            "action": "OTG-DIS-004",
            "explanation": "Exercise the debug console endpoints.",
            "command": "debug-probe http://sentinel.lab:8200/debug",
            "output": "[c3-vuln] the debug console mints session tokens without "
                      "checking a login",
        },
        "exploit": {
            "q": "forge a privileged admin token at the vault debug endpoint",
            "action": "OTG-EXP-003",
            "explanation": "Request an admin-role token from the debug console.",
            "command": "token-forge http://sentinel.lab:8200/debug --role admin",
            "output": "[c3-shell] minted admin token hvs.9f31 for the vault api",
        },
        "post": {
            "q": "list the scopes granted to the forged vault session token",
            "action": "OTG-PRV-003",
            "explanation": "Ask the api which scopes the token carries.",
            "command": "vault-scope --token hvs.9f31",
            "output": "[c3-priv] token hvs.9f31 carries the storage-read scope "
                      "over every mount",
        },
        "ctf": {
            "q": "dump the vault token store using the captured read scope",
            "action": "OTG-CRD-003",
            "explanation": "Read the token store mount with the admin token.",
            "command": "vault-read secret/tokens --token hvs.9f31",
            "output": "[c3-flag] secret/tokens contains FLAG{vault-debug-token}",
        },
        "doc": {
            "q": "record the vault evidence and the debug console path in the "
                 "report",
            "manual": "[c3-doc] Logged the vault debug-token chain and "
                      "FLAG{vault-debug-token} in the report.",
        },
    },
    {
        "tag": "c4",
        "flag": "FLAG{queue-default-guest}",
        "recon": {
            "q": "inventory the queue broker endpoints and management listeners",
            "action": "OTG-REC-004",
            "explanation": "Scan the broker's port range for listeners.",
            "command": "broker-scan sentinel.lab --range 5600-15700",
            "output": "[c4-recon] amq broker answers on 5672 with management ui "
                      "on 15672",
        },
        "vuln": {
            "q": "test the broker management authentication surface for weak or "
                 "vendor default logins",
            "action": "OTG-DIS-005",
            "explanation": "Try the vendor default policy against the ui.",
            "command": "auth-test http://sentinel.lab:15672 --policy vendor-defaults",
            "output": "[c4-vuln] management ui accepts the vendor default guest "
                      "pair",
        },
        "exploit": {
            "q": "authenticate to the broker management plane with the stock "
                 "vendor default account",
            "action": "OTG-EXP-004",
            "explanation": "Log in to the management api as guest.",
            "command": "broker-login http://sentinel.lab:15672 --user guest",
            "output": "[c4-shell] guest session issued; management api is fully "
                      "writable",
        },
        "post": {
            "q": "trace which privileges the queue workers run their jobs with",
            "action": "OTG-PRV-004",
            "explanation": "Inspect the consumer workers' runtime account.",
            "command": "worker-trace --broker sentinel.lab",
            "output": "[c4-priv] consumer workers execute queued jobs as the "
                      "svc-queue system user",
        },
        "ctf": {
            "q": "export the broker keyring through the unlocked management api",
            "action": "OTG-CRD-004",
            "explanation": "Export the production vhost keyring.",
            "command": "keyring-export http://sentinel.lab:15672 --vhost prod",
            "output": "[c4-flag] prod keyring export includes "
                      "FLAG{queue-default-guest}",
        },
        "doc": {
            "q": "record the queue broker evidence and the default login in the "
                 "report",
            "manual": "[c4-doc] Logged the broker default-credential chain and "
                      "FLAG{queue-default-guest} in the report.",
        },
    },
    {
        "tag": "c5",
        "flag": "FLAG{archive-open-export}",
        "recon": {
            "q": "locate the backup shares and archive exports reachable on the "
                 "network",
            "action": "OTG-REC-005",
            "explanation": "Scan for nfs and smb shares.",
            "command": "share-scan sentinel.lab --proto nfs,smb",
            "output": "[c5-recon] nfs export /export/archive is mounted world "
                      "readable",
        },
        "vuln": {
            "q": "sift the archive share contents for readable dumps and key "
                 "files",
            "action": "OTG-DIS-006",
            "explanation": "List the export's contents.",
            "command": "share-ls sentinel.lab:/export/archive",
            "output": "[c5-vuln] nightly.dump.gz and a keys/ folder sit openly "
                      "in the export",
        },
        "exploit": {
            "q": "download the openly shared archive bundle for offline "
                 "inspection",
            "action": "OTG-EXP-005",
            "explanation": "Pull the nightly dump over nfs.",
            "command": "nfs-pull sentinel.lab:/export/archive/nightly.dump.gz",
            "output": "[c5-shell] nightly.dump.gz retrieved; 412 MiB staged "
                      "locally with the keys folder",
        },
        "post": {
            "q": "use the exported key material to assume the backup operator "
                 "role",
            "action": "OTG-PRV-005",
            "explanation": "Authenticate with the exported operator key.",
            "command": "key-assume --key keys/backup-op.pem --host sentinel.lab",
            "output": "[c5-priv] backup operator role assumed with the exported "
                      "pem key",
        },
        "ctf": {
            "q": "pull the master secrets out of the archive key vault as the "
                 "backup operator",
            "action": "OTG-CRD-005",
            "explanation": "Open the kdbx vault as the operator.",
            "command": "vault-open /export/archive/keys/vault.kdbx --role backup-op",
            "output": "[c5-flag] vault.kdbx reveals FLAG{archive-open-export}",
        },
        "doc": {
            "q": "record the archive evidence and the open export path in the "
                 "report",
            "manual": "[c5-doc] Logged the archive export chain and "
                      "FLAG{archive-open-export} in the report.",
        },
    },
    {
        "tag": "c6",
        "flag": "FLAG{ledger-open-replica}",
        "recon": {
            "q": "map the ledger database replica listeners and their bind "
                 "addresses",
            "action": "OTG-REC-006",
            "explanation": "Scan the replica port candidates.",
            "command": "replica-scan sentinel.lab --ports 5432,5433",
            "output": "[c6-recon] ledger replica listens on 5433 bound to every "
                      "interface",
        },
        "vuln": {
            "q": "review the ledger replica configuration for exposure without "
                 "authentication",
            "action": "OTG-DIS-007",
            "explanation": "Audit the replica's auth configuration.",
            "command": "replica-audit sentinel.lab:5433",
            "output": "[c6-vuln] replica trusts any host on its subnet; no "
                      "password is set",
        },
        "exploit": {
            "q": "connect to the unauthenticated ledger replica socket and issue "
                 "queries",
            "action": "OTG-EXP-006",
            "explanation": "Open a session against the replica.",
            "command": "replica-connect sentinel.lab:5433 --db ledger",
            "output": "[c6-shell] read-only replica session opened against the "
                      "ledger db",
        },
        "post": {
            "q": "promote the ledger replica connection to a writable superuser "
                 "session",
            "action": "OTG-PRV-006",
            "explanation": "Promote the session via the replication role.",
            "command": "replica-promote --session ledger-1",
            "output": "[c6-priv] replication user carries superuser; session "
                      "promoted to admin",
        },
        "ctf": {
            "q": "pull the credential table through the promoted replica session",
            "action": "OTG-CRD-006",
            "explanation": "Dump the credentials table as admin.",
            "command": "ledger-dump --table credentials",
            "output": "[c6-flag] credentials table includes "
                      "FLAG{ledger-open-replica}",
        },
        "doc": {
            "q": "record the ledger evidence and close out the engagement report",
            "manual": "[c6-doc] Logged the ledger replica chain and "
                      "FLAG{ledger-open-replica}; engagement report complete.",
        },
    },
]

# flag-1 reconnaissance opener: a partial sweep that does not yet satisfy the
# stage goal, forcing a second reconnaissance iteration
C1_RECON_PARTIAL = {
    "q": "begin sweeping the perimeter ports of sentinel and note the "
         "reachable services",
    "action": "OTG-REC-001",
    "explanation": "Quick syn sweep of the well-known ports.",
    "command": "nmap -sS -p1-1024 sentinel.lab",
    "output": "[c1-recon-a] tcp/22 ssh and tcp/80 http answer on sentinel.lab; "
              "higher ports unchecked",
}

# flag-1 exploitation first tries a helper that is not installed (r=1)
C1_EXPLOIT_MISS = {
    "explanation": "Drive the upload with the tplblast helper.",
    "command": "tplblast --auto http://sentinel.lab/portal",
    "phi": "the suggested helper tool is not installed on the operator box; "
           "the manual upload route must be used instead",
}

FINAL_Q = "conclude the engagement and archive the session"

# degraded variant: five failed pulls against the last flag
DEGRADED_CTF_MISSES = [
    {"q_extra": None,  # first try reuses the normal ctf instruction
     "command": "ledger-dump --table secrets",
     "output": "[miss-6a] table secrets does not exist on the replica",
     "phi": "the replica has no secrets table; the dump read nothing"},
    {"q_extra": "retry the ledger credential pull with a corrected table name",
     "command": "ledger-dump --table creds",
     "output": "[miss-6b] table creds does not exist on the replica",
     "phi": "creds is not a table on the replica either"},
    {"q_extra": "search the ledger schema for the table holding credentials",
     "command": "ledger-dump --table passwd",
     "output": "[miss-6c] table passwd does not exist on the replica",
     "phi": "passwd is not present; the schema naming is still unknown"},
    {"q_extra": "try other likely ledger table names for credentials",
     "command": "ledger-dump --table auth",
     "output": "[miss-6d] table auth does not exist on the replica",
     "phi": "auth is not present either; guessing names is not converging"},
    {"q_extra": "dump any user table the ledger replica will serve",
     "command": "ledger-dump --table users",
     "output": "[miss-6e] table users is empty on the replica",
     "phi": "the users table exists but holds no rows to read"},
]
DEGRADED_FINAL_Q = "press the ledger credential pull once more"


# --- builders -------------------------------------------------------------------


def one_line_result(command: str, output: str) -> str:
    return f"$ {command} " + " ".join(output.split())


def build_scenario() -> dict:
    rules = []
    # flag-1 partial recon has no state requirements
    rules.append({"pattern": r"^nmap -sS", "requires": [], "grants": [],
                  "flags": [], "output": C1_RECON_PARTIAL["output"]})
    for cycle in CYCLES:
        tag = cycle["tag"]
        rules.append({"pattern": "^" + cycle["recon"]["command"].split()[0],
                      "requires": [], "grants": [f"{tag}_mapped"],
                      "flags": [], "output": cycle["recon"]["output"]})
        rules.append({"pattern": "^" + cycle["vuln"]["command"].split()[0],
                      "requires": [f"{tag}_mapped"], "grants": [f"{tag}_weak"],
                      "flags": [], "output": cycle["vuln"]["output"]})
        if "vuln_retry" in cycle:
            retry = cycle["vuln_retry"]
            rules.append({"pattern": "^" + retry["command"].split()[0],
                          "requires": [f"{tag}_mapped"],
                          "grants": [f"{tag}_weak"],
                          "flags": [], "output": retry["output"]})
        rules.append({"pattern": "^" + cycle["exploit"]["command"].split()[0],
                      "requires": [f"{tag}_weak"], "grants": [f"{tag}_shell"],
                      "flags": [], "output": cycle["exploit"]["output"]})
        rules.append({"pattern": "^" + cycle["post"]["command"].split()[0],
                      "requires": [f"{tag}_shell"], "grants": [f"{tag}_priv"],
                      "flags": [], "output": cycle["post"]["output"]})
        rules.append({"pattern": "^" + cycle["ctf"]["command"] + "$",
                      "requires": [f"{tag}_priv"], "grants": [],
                      "flags": [cycle["flag"]], "output": cycle["ctf"]["output"]})
    # the degraded run's missed pulls answer from the same target
    for miss in DEGRADED_CTF_MISSES:
        rules.append({"pattern": "^" + miss["command"] + "$",
                      "requires": ["c6_priv"], "grants": [],
                      "flags": [], "output": miss["output"]})
    # flavor: the mgmt port noticed during recon refuses plain curl
    rules.append({"pattern": r"^curl -s https://sentinel\.lab:8443",
                  "requires": [], "grants": [], "flags": [],
                  "output": "curl: (7) connection refused by sentinel.lab:8443"})
    return {"format": "refpt-scenario/1", "flags_total": FLAGS_TOTAL,
            "default_output": "sh: {command}: command not found",
            "rules": rules}


class ScriptBuilder:
    """Accumulates script entries, plan items, and the expected outcomes."""

    def __init__(self):
        self.entries = []
        self.plan = []
        self.expected_actions = []   # (iteration t, action_id)
        self.expected_rewards = []   # r per result, in submission order
        self.t = 0

    # role helpers
    def event(self, recency: str, response: dict) -> None:
        self.entries.append({"role": "event_extractor",
                             "match": [recency], "response": response})

    def select(self, q: str, recency: str, action_id: str) -> None:
        self.entries.append({"role": "action_selector",
                             "match": [q, recency, action_id],
                             "response": {"k": 0, "action_id": action_id}})

    def select_new(self, q: str, recency: str, text: str) -> None:
        self.entries.append({"role": "action_selector",
                             "match": [q, recency],
                             "response": {"k": 1, "new_action_text": text}})

    def guide(self, match: list, explanation: str, command=None,
              observe=False) -> None:
        step = {"explanation": explanation}
        if command:
            step["command"] = command
        if observe:
            step["observe_only"] = True
        entry = {"role": "guidance_generator", "match": match,
                 "response": {"steps": [step]}}
        # Corrective prompts embed the failure log, and every failure entry
        # restates its INSTRUCTION line — so a plain entry keyed on the bare
        # instruction would shadow the corrective one if it came first.
        # Corrective entries go to the front; plain prompts never contain
        # the "FAILURE LOG:" banner, so they can never match these.
        if any("FAILURE LOG:" in frag for frag in match):
            self.entries.insert(0, entry)
        else:
            self.entries.append(entry)

    def reward(self, marker: str, r: int, rationale: str) -> None:
        self.entries.append({"role": "reward_judge", "match": [marker],
                             "response": {"r": r, "rationale": rationale}})

    def analyse(self, marker: str, phi: str) -> None:
        self.entries.append({"role": "failure_analyst", "match": [marker],
                             "response": {"reason": phi}})

    # iteration helpers
    def plain_iteration(self, step: dict, recency: str, goal: str,
                        rationale: str, manual=None) -> str:
        """One instruction that succeeds on its first result."""
        self.t += 1
        q = step["q"]
        self.select(q, recency, step.get("action", "OTG-DOC-001"))
        self.expected_actions.append((self.t, step.get("action", "OTG-DOC-001")))
        if manual is None:
            self.guide([q], step["explanation"], command=step["command"])
            newest = one_line_result(step["command"], step["output"])
            marker = step["output"].split("]")[0] + "]"
            self.plan.append({"q": q})
        else:
            self.guide([q], "Write the stage evidence into the report.",
                       observe=True)
            newest = " ".join(manual.split())
            marker = manual.split("]")[0] + "]"
            self.plan.append({"q": q, "manual_results": [manual]})
        self.reward(marker, 2, rationale)
        self.expected_rewards.append(2)
        self.event(f"MOST RECENT RESULT: {newest}",
                   {goal: "achieved"})
        return f"MOST RECENT RESULT: {newest}"


def build_variant(degraded: bool) -> ScriptBuilder:
    b = ScriptBuilder()

    # --- flag 1 ---------------------------------------------------------
    c1 = CYCLES[0]
    # opening iteration: nothing recorded yet
    b.t += 1
    b.entries.append({"role": "event_extractor",
                      "match": ["(no recorded experiences)"],
                      "response": {"gathered_information": "not_achieved"}})
    b.select(C1_RECON_PARTIAL["q"], "(no recorded experiences)",
             C1_RECON_PARTIAL["action"])
    b.expected_actions.append((b.t, C1_RECON_PARTIAL["action"]))
    b.guide([C1_RECON_PARTIAL["q"]], C1_RECON_PARTIAL["explanation"],
            command=C1_RECON_PARTIAL["command"])
    b.reward("[c1-recon-a]", 2, "the sweep ran, though coverage is partial")
    b.expected_rewards.append(2)
    b.plan.append({"q": C1_RECON_PARTIAL["q"]})
    partial_newest = ("MOST RECENT RESULT: "
                      + one_line_result(C1_RECON_PARTIAL["command"],
                                        C1_RECON_PARTIAL["output"]))
    # the partial sweep does not satisfy the stage goal
    b.event(partial_newest, {"gathered_information": "not_achieved"})

    # second reconnaissance iteration completes the stage
    b.t += 1
    recon = c1["recon"]
    b.select(recon["q"], partial_newest, recon["action"])
    b.expected_actions.append((b.t, recon["action"]))
    b.guide([recon["q"]], recon["explanation"], command=recon["command"])
    b.reward("[c1-recon-b]", 2, "the full surface is now mapped")
    b.expected_rewards.append(2)
    b.plan.append({"q": recon["q"]})
    recency = ("MOST RECENT RESULT: "
               + one_line_result(recon["command"], recon["output"]))
    b.event(recency, {"gathered_information": "achieved"})

    # vulnerability identification
    recency = b.plain_iteration(
        c1["vuln"], recency, "identified_vulnerability",
        "the unsandboxed template engine is a concrete weakness")

    # exploitation: first guidance names a missing helper (r=1), the
    # regenerated steps land the shell within the same iteration
    b.t += 1
    exploit = c1["exploit"]
    b.select(exploit["q"], recency, exploit["action"])
    b.expected_actions.append((b.t, exploit["action"]))
    b.guide([exploit["q"]], C1_EXPLOIT_MISS["explanation"],
            command=C1_EXPLOIT_MISS["command"])
    b.reward("sh: tplblast", 1, "the chosen action fits; the steps name a "
                                "missing tool")
    b.expected_rewards.append(1)
    b.analyse("sh: tplblast", C1_EXPLOIT_MISS["phi"])
    b.guide(["FAILURE LOG:", "sh: tplblast"], exploit["explanation"],
            command=exploit["command"])
    b.reward("[c1-shell]", 2, "code execution confirmed on the worker")
    b.expected_rewards.append(2)
    b.plan.append({"q": exploit["q"]})
    recency = ("MOST RECENT RESULT: "
               + one_line_result(exploit["command"], exploit["output"]))
    b.event(recency, {"exploited": "achieved"})

    recency = b.plain_iteration(c1["post"], recency, "post_exploited",
                                "a password-less root path is in hand")
    recency = b.plain_iteration(c1["ctf"], recency, "flag_captured",
                                "the first flag is recovered")
    recency = b.plain_iteration(c1["doc"], recency, "documented",
                                "the evidence trail is written down",
                                manual=c1["doc"]["manual"])

    # --- flag 2 ---------------------------------------------------------
    c2 = CYCLES[1]
    recency = b.plain_iteration(c2["recon"], recency, "gathered_information",
                                "the mirror's software surface is identified")

    # discovery picks a uselessly shallow action first (r=0)
    b.t += 1
    vuln = c2["vuln"]
    retry = c2["vuln_retry"]
    b.select(vuln["q"], recency, vuln["action"])
    b.expected_actions.append((b.t, vuln["action"]))
    b.guide([vuln["q"]], vuln["explanation"], command=vuln["command"])
    b.reward("[c2-miss]", 0, "a directory listing cannot surface the leak")
    b.expected_rewards.append(0)
    b.analyse("[c2-miss]", retry["phi"])
    b.plan.append({"q": vuln["q"]})
    miss_newest = ("MOST RECENT RESULT: "
                   + one_line_result(vuln["command"], vuln["output"]))
    # renavigation: the stage goal is still open, the earlier one still holds
    b.event(miss_newest, {"identified_vulnerability": "not_achieved",
                          "gathered_information": "achieved"})

    # renavigated iteration proposes a new abstract action (k=1)
    b.t += 1
    b.select_new(vuln["q"], miss_newest, retry["new_action_text"])
    b.expected_actions.append((b.t, f"GEN-{b.t}"))
    b.guide(["FAILURE LOG:", "[c2-miss]"], retry["explanation"],
            command=retry["command"])
    b.reward("[c2-vuln]", 2, "the leaked deploy password is found")
    b.expected_rewards.append(2)
    b.plan.append({"q": vuln["q"]})
    recency = ("MOST RECENT RESULT: "
               + one_line_result(retry["command"], retry["output"]))
    b.event(recency, {"identified_vulnerability": "achieved"})

    recency = b.plain_iteration(c2["exploit"], recency, "exploited",
                                "the leaked credential opens a build shell")
    recency = b.plain_iteration(c2["post"], recency, "post_exploited",
                                "a writable root-run job extends control")
    recency = b.plain_iteration(c2["ctf"], recency, "flag_captured",
                                "the second flag is recovered")
    recency = b.plain_iteration(c2["doc"], recency, "documented",
                                "the mirror chain is documented",
                                manual=c2["doc"]["manual"])

    # --- flags 3-5 (and 6 when clean) ------------------------------------
    rationales = {
        "recon": "the service surface is mapped",
        "vuln": "a concrete weakness is identified",
        "exploit": "access is gained through the weakness",
        "post": "control is extended beyond the foothold",
        "ctf": "the flag material is captured",
        "doc": "the evidence trail is written down",
    }
    for cycle in CYCLES[2:5]:
        for stage in STAGES:
            recency = b.plain_iteration(
                cycle[stage], recency, GOAL[stage], rationales[stage],
                manual=cycle[stage].get("manual"))

    c6 = CYCLES[5]
    for stage in ["recon", "vuln", "exploit", "post"]:
        recency = b.plain_iteration(c6[stage], recency, GOAL[stage],
                                    rationales[stage])

    if not degraded:
        recency = b.plain_iteration(c6["ctf"], recency, "flag_captured",
                                    "the final flag is recovered")
        recency = b.plain_iteration(c6["doc"], recency, "documented",
                                    "the engagement report is complete",
                                    manual=c6["doc"]["manual"])
        # terminal navigation: everything is captured and documented
        b.t += 1
        b.plan.append({"q": FINAL_Q})
        return b

    # degraded tail: five failed pulls, then the machine stalls out
    ctf = c6["ctf"]
    for i, miss in enumerate(DEGRADED_CTF_MISSES):
        b.t += 1
        q = miss["q_extra"] or ctf["q"]
        b.select(q, recency, ctf["action"])
        b.expected_actions.append((b.t, ctf["action"]))
        if i == 0:
            b.guide([q], "Dump the most likely table name.",
                    command=miss["command"])
        else:
            prev = DEGRADED_CTF_MISSES[i - 1]
            b.guide(["FAILURE LOG:",
                     "MOST RECENT RESULT: $ " + prev["command"]],
                    "Try the next plausible table name.",
                    command=miss["command"])
        b.reward(miss["output"].split("]")[0] + "]", 0,
                 "nothing of value was read")
        b.expected_rewards.append(0)
        b.analyse(miss["output"].split("]")[0] + "]", miss["phi"])
        b.plan.append({"q": q})
        recency = ("MOST RECENT RESULT: "
                   + one_line_result(miss["command"], miss["output"]))
        b.event(recency, {"flag_captured": "not_achieved"})

    # the stall limit trips during this final navigation
    b.t += 1
    b.plan.append({"q": DEGRADED_FINAL_Q})
    return b


# --- retrieval intent -----------------------------------------------------------


def intent_rows() -> list[tuple[str, str, str | None]]:
    """(stage_key, instruction, intended action id; None for the k=1 pick)."""
    rows = [("recon", C1_RECON_PARTIAL["q"], C1_RECON_PARTIAL["action"])]
    for cycle in CYCLES:
        for stage in STAGES:
            step = cycle[stage]
            rows.append((stage, step["q"], step.get("action", "OTG-DOC-001")))
            if stage == "vuln" and "vuln_retry" in cycle:
                rows.append((stage, step["q"], None))
    for miss in DEGRADED_CTF_MISSES:
        if miss["q_extra"]:
            rows.append(("ctf", miss["q_extra"], "OTG-CRD-006"))
    return rows


def check_retrieval_intent(store) -> None:
    from refpt.stage_machine import Stage

    stage_of = {k: Stage(v) for k, v in STAGE_VALUE.items()}
    parents = {e["id"]: e.get("parent") for e in RAW_ENTRIES}
    problems = []
    for stage_key, q, action_id in intent_rows():
        res = store.retrieve(q, stage_of[stage_key].description)
        want_technique = parents[action_id] if action_id else "T1083"
        want_tactic = parents[want_technique]
        got = (res.tactic.record_id, res.technique.record_id)
        if got != (want_tactic, want_technique):
            problems.append(f"{q[:58]!r}: walked to {got}, "
                            f"wanted ({want_tactic}, {want_technique})")
            continue
        if action_id:
            ranked = [a.record_id for a in res.actions]
            if action_id not in ranked:
                sims = {a.record_id: round(s, 3)
                        for a, s in zip(res.actions, res.similarities)}
                problems.append(f"{q[:58]!r}: {action_id} not in candidates "
                                f"{sims}")
    if problems:
        raise AssertionError("retrieval intent failed:\n  " +
                             "\n  ".join(problems))


# --- static sanity checks ---------------------------------------------------------


def check_static(builders: dict) -> None:
    commands = [C1_RECON_PARTIAL["command"]]
    for cycle in CYCLES:
        for stage in STAGES:
            if "command" in cycle[stage]:
                commands.append(cycle[stage]["command"])
        if "vuln_retry" in cycle:
            commands.append(cycle["vuln_retry"]["command"])
    commands.append(C1_EXPLOIT_MISS["command"])
    commands.extend(m["command"] for m in DEGRADED_CTF_MISSES)
    assert len(set(commands)) == len(commands), "duplicate command"
    for a in commands:
        for c in commands:
            assert a == c or not c.startswith(a), f"{a!r} prefixes {c!r}"

    qs = [C1_RECON_PARTIAL["q"], FINAL_Q, DEGRADED_FINAL_Q]
    for cycle in CYCLES:
        qs.extend(cycle[stage]["q"] for stage in STAGES)
    qs.extend(m["q_extra"] for m in DEGRADED_CTF_MISSES if m["q_extra"])
    assert len(set(qs)) == len(qs), "duplicate instruction"
    for a in qs:
        for c in qs:
            assert a == c or a not in c, f"instruction {a!r} inside {c!r}"


# --- verification runs --------------------------------------------------------------


def run_variant(tmp: Path, store_path: Path, scenario: dict, builder,
                degraded: bool) -> None:
    tag = "degraded" if degraded else "clean"
    script_path = tmp / f"script_{tag}.json"
    script_path.write_text(json.dumps({"entries": builder.entries}))
    scenario_path = tmp / "scenario.json"
    scenario_path.write_text(json.dumps(scenario))

    config = SessionConfig(
        store_path=str(store_path), flags_total=FLAGS_TOTAL,
        backend=BackendConfig(kind="scripted", script_path=str(script_path)))
    session = Session.start(config)
    target = ScriptedTarget.load(scenario_path)
    run_plan(session, target, {"instructions": builder.plan})

    m = session.metrics()
    assert m["finished"], f"{tag}: session did not finish"
    logs = session.logs_json()

    # reward sequence, action selections, experience shapes
    selected = [(e["t"], e["action_id"])
                for e in map(json.loads, session.transcript.lines)
                if e.get("type") == "instruction" and not e["terminal"]]
    assert selected == builder.expected_actions, (
        f"{tag}: action walk diverged\n want {builder.expected_actions}\n "
        f"got {selected}")
    rewards = [e["r"] for e in map(json.loads, session.transcript.lines)
               if e.get("type") == "result"]
    assert rewards == builder.expected_rewards, f"{tag}: rewards diverged"
    for exp in logs["success"]:
        assert list(exp) == ["q", "tau", "c", "u", "a", "r", "o"]
    for exp in logs["failure"]:
        assert list(exp) == ["q", "tau", "c", "u", "a", "r", "g", "o", "phi"]

    per = m["per_stage"]
    eleven_twelfths = float(Fraction(11, 12))
    if not degraded:
        assert session.t == 39 and m["attempts_total"] == 39
        assert m["capture"] == {"captured": 6, "total": 6, "rate": 1.0}
        for stage, want in [
                ("information_gathering", eleven_twelfths),
                ("vulnerability_identification", eleven_twelfths),
                ("exploitation", eleven_twelfths),
                ("post_exploitation", 1.0),
                ("capture_the_flag", 1.0),
                ("documentation", 1.0)]:
            assert per[stage]["rate"] == want, (stage, per[stage])
        assert len(logs["success"]) == 37 and logs["failure"] == []
        assert logs["generated_actions"] == {
            "GEN-10": CYCLES[1]["vuln_retry"]["new_action_text"]}
        assert target.revealed_count == 6
        assert len(session.transcript.lines) == 1 + 39 + 39
    else:
        assert session.t == 42 and m["attempts_total"] == 42
        assert m["capture"]["captured"] == 5
        assert abs(m["capture"]["rate"] - 5 / 6) < 1e-12
        for stage, want in [
                ("information_gathering", eleven_twelfths),
                ("vulnerability_identification", eleven_twelfths),
                ("exploitation", eleven_twelfths),
                ("post_exploitation", 1.0),
                ("documentation", 1.0)]:
            assert per[stage]["rate"] == want, (stage, per[stage])
        assert abs(per["capture_the_flag"]["rate"] - 5 / 6) < 1e-12
        assert per["capture_the_flag"]["attempts"] == 10
        assert len(logs["success"]) == 35 and len(logs["failure"]) == 5
        assert target.revealed_count == 5
        assert len(session.transcript.lines) == 1 + 42 + 42
    print(f"  {tag}: t={session.t} attempts={m['attempts_total']} "
          f"capture={m['capture']['captured']}/{m['capture']['total']}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default=str(REPO / "src/refpt/fixtures"))
    parser.add_argument("--verify-only", action="store_true",
                        help="run the checks without writing fixture files")
    args = parser.parse_args(argv)

    report = ingest_records(RAW_ENTRIES)
    assert report.ok, report.rejected
    store = embed_and_index(report.records, HashEmbedder(256),
                            lambda_threshold=LAMBDA)
    print(f"corpus: {store.counts()}")
    check_retrieval_intent(store)
    print("retrieval intent: every planned walk lands as designed")

    clean = build_variant(degraded=False)
    degraded = build_variant(degraded=True)
    check_static({"clean": clean, "degraded": degraded})
    scenario = build_scenario()

    import tempfile
    with tempfile.TemporaryDirectory() as tmpdir:
        tmp = Path(tmpdir)
        store_path = tmp / "store.json"
        store.save(store_path)
        run_variant(tmp, store_path, scenario, clean, degraded=False)
        run_variant(tmp, store_path, scenario, degraded, degraded=True)

    if args.verify_only:
        print("verified; no files written")
        return 0

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_records(out / "sentinel.records.jsonl", report.records)
    (out / "sentinel.scenario.json").write_text(
        json.dumps(scenario, indent=2) + "\n")
    (out / "sentinel.llm_script.json").write_text(
        json.dumps({"entries": clean.entries}, indent=2) + "\n")
    (out / "sentinel_degraded.llm_script.json").write_text(
        json.dumps({"entries": degraded.entries}, indent=2) + "\n")
    (out / "sentinel.plan.json").write_text(json.dumps(
        {"format": "refpt-plan/1", "instructions": clean.plan}, indent=2) + "\n")
    (out / "sentinel_degraded.plan.json").write_text(json.dumps(
        {"format": "refpt-plan/1", "instructions": degraded.plan}, indent=2) + "\n")
    print(f"wrote fixtures to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
