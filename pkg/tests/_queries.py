"""Curated address-query cases with hand-assigned expectations."""

# (expression, address, hand label); the regex oracle must agree with the label
CURATED = [
    ('"Univ* Al?cant*"', "Univ Alicante, Dept Quim, Alicante, Spain", True),
    ('"Univ* Al?cant*"', "Universidad de Alicante, Spain", False),
    ('"Univ* de Al?cant*"', "Universidad de Alicante, Spain", True),
    ('"Univ* *Al?cant*"', "Univ Politecn Alicante, Spain", False),
    ('"Univ* *Al?cant*"', "Univ. EAlicante, Spain", True),
    ('"Al?cant* Univ*"', "Alacant Universitat, Spain", True),
    ('"Al?cant* Univ*"', "Alcant Univ, Spain", False),
    ('"Univ* Alcala" OR UAH', "Univ Alcalá, Madrid", True),
    ('"Univ* Alcala" OR UAH', "UAH, Dept Fis, Spain", True),
    ('"Univ* Alcala" OR UAH', "UAHX Inc, USA", False),
    ('"Univ* Barcelona" OR UB', "Hosp Clin, UB, Barcelona", True),
    ('"Univ* Barcelona" OR UB', "Univ Autonoma Barcelona, Spain", False),
    ('"Univ* Auto* Barcelona" OR "Auto* Univ* Barcelona" OR UAB', "Autonomous Univ Barcelona", True),
    ('"Univ* Jaume" OR "Jaume Univ*" OR UJI (NOT Kyoto)', "Univ Jaume 1, Castellon", True),
    ('"Univ* Jaume" OR "Jaume Univ*" OR UJI (NOT Kyoto)', "UJI, Castellon, Spain", True),
    ('"Univ* Jaume" OR "Jaume Univ*" OR UJI (NOT Kyoto)', "UJI Kyoto Branch, Japan", False),
    ('"Univ* Jaume" OR "Jaume Univ*" OR UJI (NOT Kyoto)', "Univ Jaume, Kyoto Off", True),
    ('"Univ* Oberta Cat*" OR (UOC NEAR/1 Spain)', "UOC Barcelona Spain", True),
    ('"Univ* Oberta Cat*" OR (UOC NEAR/1 Spain)', "UOC, eHlth Ctr, Barcelona, Spain", False),
    ('"Univ* Oberta Cat*" OR (UOC NEAR/1 Spain)', "Spain, UOC", True),
    ('"Univ* Oberta Cat*" OR (UOC NEAR/1 Spain)', "Univ Oberta Catalunya, Spain", True),
    ('(UOC NEAR/0 Spain)', "UOC Spain", True),
    ('(UOC NEAR/0 Spain)', "UOC Catalonia Spain", False),
    ('(UOC NEAR/3 Spain)', "UOC a b c Spain", True),
    ('(UOC NEAR/3 Spain)', "UOC a b c d Spain", False),
    ('("Univ Navarra" NEAR/2 Pamplona)', "Pamplona, Clin Univ Navarra", True),
    ('UPM (NOT Malaysia)', "UPM, Madrid, Spain", True),
    ('UPM (NOT Malaysia)', "Univ Putra Malaysia UPM", False),
    ('UPM NOT Malaysia', "UPM Serdang, Malaysia", False),
    ('UPM AND Madrid', "ETSI Telecomunicac UPM, Madrid", True),
    ('UPM AND Madrid', "UPM Serdang", False),
    ('UPM Madrid', "Madrid UPM", True),
    ('NOT Kyoto', "Madrid", True),
    ('NOT Kyoto', "Kyoto Univ", False),
    ('UPV/EHU', "Univ Basque Country UPV EHU, Leioa", True),
    ('UPV/EHU', "UPV, Valencia, EHU Bilbao", False),
    ('UCH-CEU', "Univ CEU Cardenal Herrera, UCH CEU", True),
    ('"CEU Card?nal Herrera"', "CEU Cardenal Herrera Univ", True),
    ('"CEU Card?nal Herrera"', "CEU Cardinal Herrera Univ", True),
    ('"CEU Card?nal Herrera"', "CEU Cardnal Herrera Univ", False),
    ('"Univ* Politec* Madrid"', "Universidad Politécnica de Madrid", False),
    ('"Univ* Politec* Madrid"', "UNIVERSIDAD POLITECNICA MADRID", True),
    ('"Univ* Girona" OR UdG', "Univ Girona, Inst Aquat Ecol", True),
    ('"Univ* Girona" OR UdG', "udg girona", True),
    ('Valencia (NOT Politec*) (NOT "Cat* Univ*")', "Univ Valencia, Burjassot", True),
    ('Valencia (NOT Politec*) (NOT "Cat* Univ*")', "Univ Politecn Valencia", False),
    ('Valencia (NOT Politec*) (NOT "Cat* Univ*")', "Catholic Univ Valencia", False),
    ('(A OR B) C', "b x c", True),
    ('(A OR B) C', "a b", False),
    ('A OR B C', "a", True),
]
