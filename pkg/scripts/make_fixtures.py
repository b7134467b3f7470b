#!/usr/bin/env python3
"""Regenerate the fixture bundles and their index.

Ids are uuid5-derived from entity names, so reruns are byte-stable.
"""

from __future__ import annotations

import json
import uuid
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "fixtures" / "bundles"

NS = uuid.UUID("a36fe6a4-5a86-4e2b-907c-12f3c1f4dbe1")


def sid(stix_type: str, name: str) -> str:
    return f"{stix_type}--{uuid.uuid5(NS, stix_type + '|' + name)}"


def obj(stix_type: str, name: str, created: str, modified: str | None = None,
        **props) -> dict:
    out = {
        "type": stix_type,
        "spec_version": "2.1",
        "id": sid(stix_type, name),
        "created": created,
        "modified": modified or created,
        "name": name,
    }
    out.update(props)
    return out


def observable(stix_type: str, key: str, value: str, **props) -> dict:
    out = {
        "type": stix_type,
        "spec_version": "2.1",
        "id": sid(stix_type, value),
        key: value,
    }
    out.update(props)
    return out


def rel(rel_type: str, source: dict, target: dict, created: str) -> dict:
    return {
        "type": "relationship",
        "spec_version": "2.1",
        "id": sid("relationship", f"{source['id']}|{rel_type}|{target['id']}"),
        "created": created,
        "modified": created,
        "relationship_type": rel_type,
        "source_ref": source["id"],
        "target_ref": target["id"],
    }


def sighting(of: dict, where: dict, created: str) -> dict:
    return {
        "type": "sighting",
        "spec_version": "2.1",
        "id": sid("sighting", f"{of['id']}|{where['id']}|{created}"),
        "created": created,
        "modified": created,
        "sighting_of_ref": of["id"],
        "where_sighted_refs": [where["id"]],
    }


def bundle(objects: list[dict]) -> dict:
    return {
        "type": "bundle",
        "id": sid("bundle", objects[0]["id"]),
        "objects": objects,
    }


FIXTURES: list[dict] = []


def add(name: str, report_type: str, objects: list[dict],
        focus: dict | None = None) -> None:
    FIXTURES.append({
        "name": name,
        "file": f"{name}.json",
        "report_type": report_type,
        "focus_id": focus["id"] if focus else None,
        "root_ids": sorted(o["id"] for o in objects
                           if o["type"] not in ("relationship", "sighting")),
        "objects": objects,
    })


# --- overview fixtures ---------------------------------------------------

botnet_infra = obj(
    "infrastructure", "Malware Botnet Example", "2020-03-11T09:00:00.000Z",
    description="A command infrastructure that coordinates a network of "
                "compromised hosts used for bulk malicious traffic.",
)
asprox = obj(
    "malware", "Asprox", "2019-05-05T10:30:00.000Z", "2020-01-01T08:00:00.000Z",
    description="Asprox is a spam botnet family that spreads through "
                "compromised web servers and distributes malicious payloads.",
    aliases=["Badsrc"],
)
ip_one = observable("ipv4-addr", "value", "203.0.113.5")
ip_two = observable("ipv4-addr", "value", "198.51.100.7")
add("overview-botnet", "overview", [
    botnet_infra, asprox, ip_one, ip_two,
    rel("uses", asprox, botnet_infra, "2020-03-11T09:05:00.000Z"),
    rel("consists-of", botnet_infra, ip_one, "2020-03-11T09:06:00.000Z"),
    rel("consists-of", botnet_infra, ip_two, "2020-03-11T09:07:00.000Z"),
])

winnti = obj(
    "intrusion-set", "Winnti Group", "2019-04-23T11:00:00.000Z",
    "2021-05-12T14:00:00.000Z",
    description="An intrusion set known for long running operations against "
                "software vendors and for abusing stolen code signing "
                "certificates.",
    aliases=["Blackfly"],
)
gaming = obj(
    "identity", "Gaming sector", "2019-04-23T11:00:00.000Z",
    description="Companies that develop and operate online games.",
)
pipemon = obj(
    "malware", "PipeMon", "2020-05-21T08:15:00.000Z",
    description="A modular backdoor installed as a print processor library.",
)
supply_chain = obj(
    "attack-pattern", "Supply Chain Compromise", "2019-04-23T11:00:00.000Z",
    external_references=[{
        "source_name": "mitre-attack", "external_id": "T1195",
        "url": "https://attack.mitre.org/techniques/T1195",
    }],
)
add("overview-winnti", "overview", [
    winnti, gaming, pipemon, supply_chain,
    rel("targets", winnti, gaming, "2019-04-23T11:10:00.000Z"),
    rel("uses", winnti, pipemon, "2020-05-21T08:20:00.000Z"),
    rel("uses", winnti, supply_chain, "2019-04-23T11:15:00.000Z"),
])

lure_campaign = obj(
    "campaign", "Operation Quiet Lure", "2021-02-02T07:45:00.000Z",
    description="A credential theft campaign delivered through forged "
                "billing portals.",
)
lure_loader = obj(
    "malware", "Emotet", "2021-02-02T07:50:00.000Z",
    description="A loader that retrieves second stage payloads from "
                "attacker controlled hosts.",
)
lure_domain = observable("domain-name", "value", "mail-lure-portal.example.net")
lure_indicator = obj(
    "indicator", "Loader callback indicator", "2021-02-03T12:00:00.000Z",
    pattern="[ipv4-addr:value = '192.0.2.44']",
    pattern_type="stix",
)
add("overview-lure", "overview", [
    lure_campaign, lure_loader, lure_domain, lure_indicator,
    rel("uses", lure_campaign, lure_loader, "2021-02-02T07:55:00.000Z"),
    rel("communicates-with", lure_loader, lure_domain, "2021-02-02T08:00:00.000Z"),
    rel("indicates", lure_indicator, lure_loader, "2021-02-03T12:05:00.000Z"),
])

# --- subject fixtures ----------------------------------------------------

sand_viper = obj(
    "threat-actor", "Sand Viper Crew", "2018-09-17T10:00:00.000Z",
    "2020-11-30T16:30:00.000Z",
    description="A financially motivated crew that favors trojanized "
                "invoice documents.",
    aliases=["SVC"],
    external_references=[{
        "source_name": "profile", "url": "https://intel.example.org/profiles/sand-viper",
    }],
)
glass_fox = obj(
    "malware", "Glass Fox", "2019-03-08T09:20:00.000Z",
    description="A remote access trojan with clipboard capture modules.",
)
spearphish = obj(
    "attack-pattern", "Spearphishing Attachment", "2018-09-17T10:00:00.000Z",
    external_references=[{
        "source_name": "mitre-attack", "external_id": "T1566",
        "url": "https://attack.mitre.org/techniques/T1566",
    }],
)
viper_ip = observable("ipv4-addr", "value", "198.51.100.23")
add("subject-sandviper", "subject", [
    sand_viper, glass_fox, spearphish, viper_ip,
    rel("uses", sand_viper, glass_fox, "2019-03-08T09:25:00.000Z"),
    rel("uses", sand_viper, spearphish, "2018-09-17T10:05:00.000Z"),
    rel("communicates-with", glass_fox, viper_ip, "2019-03-08T09:30:00.000Z"),
], focus=sand_viper)

moonlit = obj(
    "intrusion-set", "Moonlit Mantis", "2017-06-14T08:00:00.000Z",
    "2021-08-19T10:00:00.000Z",
    description="An intrusion set that moves laterally through stolen "
                "administrator credentials.",
    external_references=[{
        "source_name": "profile", "url": "https://intel.example.org/profiles/moonlit-mantis",
    }],
)
crimson_beacon = obj(
    "tool", "Crimson Beacon", "2018-01-22T13:40:00.000Z",
    description="A post exploitation implant kit observed in several "
                "intrusions.",
)
cred_dump = obj(
    "attack-pattern", "Credential Dumping", "2017-06-14T08:00:00.000Z",
    external_references=[{
        "source_name": "mitre-attack", "external_id": "T1003",
        "url": "https://attack.mitre.org/techniques/T1003",
    }],
)
mantis_domain = observable("domain-name", "value", "mantis-relay.example.com")
mantis_file = observable(
    "file", "name", "beacon_payload",
    hashes={"SHA-256": "6a204bd89f3c8348afd5c77c717a097a"
                       "aa9b4e4f38b2c5efdbf9b4d2a80ab6a1"},
)
add("subject-moonlit", "subject", [
    moonlit, crimson_beacon, cred_dump, mantis_domain, mantis_file,
    rel("uses", moonlit, crimson_beacon, "2018-01-22T13:45:00.000Z"),
    rel("uses", moonlit, cred_dump, "2017-06-14T08:05:00.000Z"),
    rel("communicates-with", crimson_beacon, mantis_domain, "2018-01-22T13:50:00.000Z"),
    rel("delivers", crimson_beacon, mantis_file, "2018-01-22T13:55:00.000Z"),
], focus=moonlit)

heron = obj(
    "threat-actor", "Harvest Heron", "2020-10-05T09:10:00.000Z",
    "2022-02-14T11:00:00.000Z",
    description="An actor that targets agricultural suppliers during "
                "seasonal procurement windows.",
)
tin_harvest = obj(
    "campaign", "Operation Tin Harvest", "2021-09-01T07:00:00.000Z",
    description="A wave of intrusions against rural logistics providers.",
)
forged_invoice = obj(
    "attack-pattern", "Forged Invoice Delivery", "2020-10-05T09:10:00.000Z",
    external_references=[{
        "source_name": "mitre-attack", "external_id": "T1204",
        "url": "https://attack.mitre.org/techniques/T1204",
    }],
)
heron_ip = observable("ipv4-addr", "value", "192.0.2.199")
add("subject-heron", "subject", [
    heron, tin_harvest, forged_invoice, heron_ip,
    rel("attributed-to", tin_harvest, heron, "2021-09-01T07:05:00.000Z"),
    rel("uses", heron, forged_invoice, "2020-10-05T09:15:00.000Z"),
    rel("communicates-with", tin_harvest, heron_ip, "2021-09-01T07:10:00.000Z"),
], focus=heron)

# --- timeline fixtures ---------------------------------------------------

gale_hermit = obj(
    "intrusion-set", "Gale Hermit", "2019-01-10T08:00:00.000Z",
    "2020-06-20T09:30:00.000Z",
    description="An intrusion set tracked across several utility sector "
                "incidents.",
)
brittle_lantern = obj(
    "malware", "Brittle Lantern", "2019-07-04T14:20:00.000Z",
    "2020-02-18T10:00:00.000Z",
    description="A wiper disguised as a firmware update utility.",
)
acme_soc = obj(
    "identity", "Acme Utilities SOC", "2019-01-10T08:00:00.000Z",
    description="The monitoring team of a regional utility operator.",
)
add("timeline-gale", "timeline", [
    gale_hermit, brittle_lantern, acme_soc,
    rel("uses", gale_hermit, brittle_lantern, "2019-07-04T14:25:00.000Z"),
    sighting(brittle_lantern, acme_soc, "2020-03-02T22:10:00.000Z"),
], focus=None)

copper_howl = obj(
    "threat-actor", "Copper Howl", "2018-04-12T09:00:00.000Z",
    "2021-01-25T15:00:00.000Z",
    description="An extortion focused actor with a rotating affiliate "
                "network.",
)
lockspine = obj(
    "malware", "LockSpine", "2020-08-30T11:45:00.000Z",
    "2021-01-20T09:00:00.000Z",
    description="A file encrypting payload deployed after manual "
                "reconnaissance.",
)
cold_ledger = obj(
    "campaign", "Operation Cold Ledger", "2020-11-11T08:30:00.000Z",
    description="A series of intrusions against accounting platforms.",
)
add("timeline-ledger", "timeline", [
    copper_howl, lockspine, cold_ledger,
    rel("attributed-to", cold_ledger, copper_howl, "2020-11-11T08:35:00.000Z"),
    rel("uses", cold_ledger, lockspine, "2020-11-12T10:00:00.000Z"),
], focus=None)

relay_net = obj(
    "infrastructure", "Relay Net Alpha", "2020-05-06T07:20:00.000Z",
    "2021-03-15T12:00:00.000Z",
    description="A rented relay network used to proxy operator traffic.",
)
drab_sparrow = obj(
    "malware", "Drab Sparrow", "2020-09-09T13:10:00.000Z",
    "2021-03-10T09:45:00.000Z",
    description="A downloader that mimics telemetry upload agents.",
)
harbor_cert = obj(
    "identity", "Harbor CERT", "2020-05-06T07:20:00.000Z",
    description="A national response team for maritime operators.",
)
add("timeline-relay", "timeline", [
    relay_net, drab_sparrow, harbor_cert,
    rel("uses", drab_sparrow, relay_net, "2020-09-09T13:15:00.000Z"),
    sighting(drab_sparrow, harbor_cert, "2021-04-01T18:05:00.000Z"),
], focus=None)

# --- vulnerability fixtures ----------------------------------------------

plant_segment = obj(
    "infrastructure", "Plant Control Segment", "2019-02-20T09:00:00.000Z",
    "2019-06-01T10:00:00.000Z",
    description="The operational network segment that hosts legacy "
                "supervisory workstations.",
)
cve_smb = obj(
    "vulnerability", "CVE-2017-0144", "2017-03-14T08:00:00.000Z",
    description="A remote code execution flaw in the legacy file sharing "
                "service of older Windows systems.",
    x_cvss_score=8.1,
    x_vulnerable_configurations=["Windows Server 2008", "Windows 7"],
)
cve_rdp = obj(
    "vulnerability", "CVE-2019-0708", "2019-05-14T08:00:00.000Z",
    description="A remote code execution flaw in the remote desktop "
                "service that requires no authentication.",
    x_cvss_score=9.8,
    x_vulnerable_configurations=["Windows Server 2008 R2", "Windows XP"],
)
coa_smb = obj(
    "course-of-action", "Disable legacy file sharing protocol",
    "2017-03-15T08:00:00.000Z",
    description="Turn off the deprecated file sharing protocol version "
                "on all hosts.",
)
coa_rdp = obj(
    "course-of-action", "Install remote desktop patch",
    "2019-05-15T08:00:00.000Z",
    description="Apply the vendor security update for the remote desktop "
                "service.",
)
add("vuln-plant", "vulnerability", [
    plant_segment, cve_smb, cve_rdp, coa_smb, coa_rdp,
    rel("has", plant_segment, cve_smb, "2019-02-20T09:05:00.000Z"),
    rel("has", plant_segment, cve_rdp, "2019-06-01T10:05:00.000Z"),
    rel("mitigates", coa_smb, cve_smb, "2017-03-15T08:05:00.000Z"),
    rel("mitigates", coa_rdp, cve_rdp, "2019-05-15T08:05:00.000Z"),
], focus=plant_segment)

web_cluster = obj(
    "infrastructure", "Storefront Web Cluster", "2021-12-10T09:30:00.000Z",
    "2022-04-02T11:00:00.000Z",
    description="The public commerce cluster serving customer storefronts.",
)
cve_log4j = obj(
    "vulnerability", "CVE-2021-44228", "2021-12-10T08:00:00.000Z",
    description="A remote code execution flaw in a widely used logging "
                "library triggered by crafted lookup strings.",
    x_cvss_score=10.0,
    x_vulnerable_configurations=["Apache Log4j 2 before 2-15-0"],
)
cve_spring = obj(
    "vulnerability", "CVE-2022-22965", "2022-03-31T08:00:00.000Z",
    description="A remote code execution flaw in a web application "
                "framework through data binding.",
    x_cvss_score=9.8,
    x_vulnerable_configurations=["Spring Framework before 5-3-18"],
)
cve_console = obj(
    "vulnerability", "CVE-2020-14882", "2020-10-21T08:00:00.000Z",
    description="An unauthenticated takeover flaw in an application "
                "server administration console.",
    x_vulnerable_configurations=["Oracle WebLogic Server"],
)
coa_log4j = obj(
    "course-of-action", "Upgrade logging library",
    "2021-12-11T08:00:00.000Z",
    description="Move every service to a fixed release of the logging "
                "library.",
)
add("vuln-webstack", "vulnerability", [
    web_cluster, cve_log4j, cve_spring, cve_console, coa_log4j,
    rel("has", web_cluster, cve_log4j, "2021-12-10T09:35:00.000Z"),
    rel("has", web_cluster, cve_spring, "2022-04-02T11:05:00.000Z"),
    rel("has", web_cluster, cve_console, "2021-12-10T09:40:00.000Z"),
    rel("mitigates", coa_log4j, cve_log4j, "2021-12-11T08:05:00.000Z"),
], focus=web_cluster)

gateway = obj(
    "infrastructure", "Remote Access Gateway", "2019-08-24T09:00:00.000Z",
    "2020-01-15T10:00:00.000Z",
    description="The appliance cluster that terminates employee remote "
                "sessions.",
)
cve_pulse = obj(
    "vulnerability", "CVE-2019-11510", "2019-04-24T08:00:00.000Z",
    description="An arbitrary file reading flaw in a popular secure "
                "gateway appliance.",
    x_cvss_score=10.0,
    x_vulnerable_configurations=["Pulse Connect Secure before 9-1R1"],
)
cve_forti = obj(
    "vulnerability", "CVE-2018-13379", "2018-05-24T08:00:00.000Z",
    description="A path traversal flaw that exposes session credentials "
                "on a gateway portal.",
    x_cvss_score=9.8,
    x_vulnerable_configurations=["FortiOS 6 before 6-0-5"],
)
coa_gateway = obj(
    "course-of-action", "Patch gateway appliances",
    "2019-08-25T08:00:00.000Z",
    description="Schedule an immediate firmware update window for every "
                "gateway appliance.",
)
add("vuln-gateway", "vulnerability", [
    gateway, cve_pulse, cve_forti, coa_gateway,
    rel("has", gateway, cve_pulse, "2019-08-24T09:05:00.000Z"),
    rel("has", gateway, cve_forti, "2019-08-24T09:10:00.000Z"),
    rel("mitigates", coa_gateway, cve_pulse, "2019-08-25T08:05:00.000Z"),
    rel("mitigates", coa_gateway, cve_forti, "2019-08-25T08:10:00.000Z"),
], focus=gateway)

# --- expansion bundle (not one of the 12 report fixtures) ----------------

phishing_ap = obj(
    "attack-pattern", "Phishing", "2019-05-05T10:30:00.000Z",
    external_references=[{
        "source_name": "mitre-attack", "external_id": "T1566",
        "url": "https://attack.mitre.org/techniques/T1566",
    }],
)
exploit_ap = obj(
    "attack-pattern", "Exploit Public-Facing Application",
    "2019-05-05T10:30:00.000Z",
    external_references=[{
        "source_name": "mitre-attack", "external_id": "T1190",
        "url": "https://attack.mitre.org/techniques/T1190",
    }],
)
EXPANSION = {
    "name": "asprox-attack-patterns",
    "file": "asprox-attack-patterns.json",
    "objects": [
        asprox, phishing_ap, exploit_ap,
        rel("uses", asprox, phishing_ap, "2019-05-06T09:00:00.000Z"),
        rel("uses", asprox, exploit_ap, "2019-05-06T09:05:00.000Z"),
    ],
}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    index = []
    for fixture in FIXTURES:
        payload = bundle(fixture["objects"])
        (OUT / fixture["file"]).write_text(
            json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        index.append({k: fixture[k] for k in
                      ("name", "file", "report_type", "focus_id", "root_ids")})
    (OUT / EXPANSION["file"]).write_text(
        json.dumps(bundle(EXPANSION["objects"]), indent=2) + "\n",
        encoding="utf-8")
    (ROOT / "fixtures" / "index.json").write_text(
        json.dumps({
            "reports": index,
            "expansion_bundle": EXPANSION["file"],
            "asprox_id": asprox["id"],
        }, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(index)} report fixtures + expansion bundle to {OUT}")


if __name__ == "__main__":
    main()
