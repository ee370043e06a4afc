"""Labeled funding acknowledgments for the government-funder classifier.

Positives name a listed funder as a whole word or an exact phrase. Negatives
contain the same letters inside longer words, near-miss phrases or foreign
funders only.
"""

# (field, text): field is FO, FG or FT
POSITIVE = [
    ("FO", "Spanish Ministry of Economy and Competitiveness"),
    ("FO", "MINECO; FEDER"),
    ("FG", "MEC-FEDER CTQ2011-24560"),
    ("FO", "MICINN"),
    ("FT", "This work was supported by MINCINN under grant CGL2010-17881."),
    ("FT", "Financial support from the Ministerio de Ciencia e Innovacion is acknowledged."),
    ("FO", "CSIC; European Commission"),
    ("FT", "Funded by ISCIII through the RETICS network RD12/0036."),
    ("FO", "Carlos III Health Institute"),
    ("FO", "CICYT"),
    ("FT", "The Consejo Superior de Investigaciones Cientificas provided a JAE-Doc contract."),
    ("FO", "Consolider Program"),
    ("FO", "FICYT (Asturias)"),
    ("FG", "FIS PI11/01245"),
    ("FO", "Fondo de Investigacion Sanitaria"),
    ("FO", "Fondo de Investigaciones Sanitarias"),
    ("FT", "Partially funded by INIA project RTA2011-00050."),
    ("FO", "Iniciativa Ingenio 2010"),
    ("FO", "Instituto Carlos III"),
    ("FT", "M.G. was funded by the Instituto de Salud Carlos III (Miguel Servet programme)."),
    ("FO", "Ministry of Economy and Competitiveness, Spain"),
    ("FT", "We thank the Ministry of Education for an FPU fellowship."),
    ("FO", "Ministry of Education and Science"),
    ("FT", "Supported by the Ministry of Science and Innovation (project BFU2010-15461)."),
    ("FO", "Ministry of Science and Technology"),
    ("FT", "Grants from Espana's national plan are gratefully acknowledged."),
    ("FT", "Work carried out in Spain with regional support."),
    ("FO", "Ministerio de Economía y Competitividad (MINECO)"),
    ("FT", "Financiado por el Ministerio de Educación, España."),
    ("FO", "Spanish-Portuguese Cooperation Program"),
]

NEGATIVE = [
    ("FT", "The MECHANISM of action was studied without external funding."),
    ("FT", "Samples were confiscated by customs and later returned."),
    ("FO", "Mechanical Engineering Foundation"),
    ("FO", "National Science Foundation"),
    ("FT", "Supported by the Spainsh-language program (typo, unrelated)."),
    ("FO", "Deutsche Forschungsgemeinschaft"),
    ("FT", "The authors thank MECO Ltd for donating equipment."),
    ("FG", "MINECOR-2011-445"),
    ("FO", "MECHANOBIOLOGY INSTITUTE"),
    ("FT", "Funding from Physics (FISX) consortium, Germany."),
    ("FO", "Wellcome Trust"),
    ("FT", "Costs were covered by the Carlos Slim foundation."),
    ("FO", "INIAV Portugal"),
    ("FT", "Supported by the Ministry of Health of Brazil."),
    ("FO", "Ministry of Science, Technology and Innovation of Malaysia"),
    ("FT", "The Institute of Carlos Chagas provided reagents."),
    ("FO", "CSICOP Skeptics Fund"),
    ("FT", "Fondo Nacional de Desarrollo Cientifico y Tecnologico (FONDECYT), Chile"),
    ("FO", "European Research Council"),
    ("FT", "Fellowship from the Ministry of Educational Research of Norway."),
    ("FO", "MECSA Holding"),
    ("FT", "Funding came from a Consolider-like program in Italy."),
    ("FT", "The Iniciativa program in Mexico supported this work."),
    ("FO", "Espanol Language Institute of Miami"),
    ("FT", "Spaniel breeders association donated the animals."),
    ("FO", "Agence Nationale de la Recherche"),
    ("FT", "Partially supported by FICYTECH Inc., a private company."),
    ("FO", "Ministerium fur Bildung und Forschung"),
    ("FT", "We acknowledge MINCINNATI labs for technical help."),
    ("FG", "ISCIIIX grant 44"),
]
